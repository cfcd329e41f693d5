#pragma once

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/genome.hpp"

namespace memsys {

// One memory instance to be estimated. Codes are carried in the compiler's
// declared parameter order.
struct BatchItem {
    std::int64_t words = 0;
    std::int64_t bits = 0;
    std::vector<std::pair<std::string, int>> codes;
};

struct BatchRequest {
    std::uint64_t batch_id = 0;
    std::string compiler;
    std::vector<std::string> objectives;
    std::vector<BatchItem> items;
};

class EstimatorBackend {
public:
    virtual ~EstimatorBackend() = default;

    // One ObjectiveVector per item, item order preserved.
    virtual std::vector<ObjectiveVector> evaluate(const BatchRequest& request) = 0;

    std::uint64_t allocate_batch_id() { return next_id_.fetch_add(1); }

private:
    std::atomic<std::uint64_t> next_id_{0};
};

namespace detail {

// Unchecked surrogate formula. Multipliers are applied in declared parameter
// order so results are bit-stable across call paths.
inline ObjectiveVector surrogate_value(const CompilerSpec& comp, std::int64_t words,
                                       std::int64_t bits,
                                       const std::vector<std::pair<std::string, int>>& codes) {
    ObjectiveVector out(comp.surrogate.size());
    for (std::size_t m = 0; m < comp.surrogate.size(); ++m) {
        const SurrogateObjective& so = comp.surrogate[m];
        double v = so.base_value(words, bits);
        for (const auto& [pname, code] : codes)
            v *= so.multipliers.at(pname)[static_cast<std::size_t>(code)];
        out[m] = v;
    }
    return out;
}

// Codes of `mp` in the compiler's declared parameter order.
inline std::vector<std::pair<std::string, int>> ordered_codes(const CompilerSpec& comp,
                                                              const MemoryParameterization& mp) {
    std::vector<std::pair<std::string, int>> out;
    out.reserve(comp.params.size());
    for (const auto& p : comp.params) out.emplace_back(p.name, mp.codes.at(p.name));
    return out;
}

inline void check_codes_feasible(const CompilerSpec& comp, const MemoryRequirement& mem,
                                 const std::map<std::string, int>& codes) {
    if (!comp.words_range.contains(mem.words) || !comp.bits_range.contains(mem.bits))
        throw std::logic_error("surrogate_eval: memory " + std::to_string(mem.words) + "x" +
                               std::to_string(mem.bits) + " is outside compiler '" + comp.name +
                               "' size range");
    if (codes.size() != comp.params.size())
        throw std::logic_error("surrogate_eval: " + std::to_string(codes.size()) +
                               " codes for compiler '" + comp.name + "' with " +
                               std::to_string(comp.params.size()) + " parameters");
    std::set<std::string> combo_checked;
    for (const ComboRule* rule : applicable_combo_rules(comp, mem)) {
        std::vector<int> tuple;
        for (const auto& pname : rule->params) {
            auto it = codes.find(pname);
            if (it == codes.end())
                throw std::logic_error("surrogate_eval: missing code for parameter '" + pname + "'");
            tuple.push_back(it->second);
            combo_checked.insert(pname);
        }
        const auto tuples = feasible_combinations(comp, mem, *rule);
        if (std::find(tuples.begin(), tuples.end(), tuple) == tuples.end())
            throw std::logic_error("surrogate_eval: infeasible combination for group starting at '" +
                                   rule->params.front() + "'");
    }
    for (const auto& p : comp.params) {
        auto it = codes.find(p.name);
        if (it == codes.end())
            throw std::logic_error("surrogate_eval: missing code for parameter '" + p.name + "'");
        if (combo_checked.count(p.name)) continue;
        const auto allowed = feasible_codes(comp, mem, p.name);
        if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end())
            throw std::logic_error("surrogate_eval: code " + std::to_string(it->second) +
                                   " infeasible for parameter '" + p.name + "'");
    }
}

}  // namespace detail

// Closed-form estimate for one memory under one compiler. Codes must be
// feasible; repair is expected to have run first.
inline ObjectiveVector surrogate_eval(const CompilerSpec& comp, const MemoryRequirement& mem,
                                      const std::map<std::string, int>& codes) {
    detail::check_codes_feasible(comp, mem, codes);
    std::vector<std::pair<std::string, int>> ordered;
    ordered.reserve(comp.params.size());
    for (const auto& p : comp.params) ordered.emplace_back(p.name, codes.at(p.name));
    return detail::surrogate_value(comp, mem.words, mem.bits, ordered);
}

// In-process backend computing the catalog's closed-form model.
class SurrogateBackend : public EstimatorBackend {
public:
    explicit SurrogateBackend(const Catalog& catalog) : catalog_(catalog) {}

    std::vector<ObjectiveVector> evaluate(const BatchRequest& request) override {
        const int ci = catalog_.compiler_index(request.compiler);
        if (ci < 0)
            throw BackendError("batch " + std::to_string(request.batch_id) +
                               ": unknown compiler '" + request.compiler + "'");
        const CompilerSpec& comp = catalog_.compilers[static_cast<std::size_t>(ci)];
        std::vector<ObjectiveVector> out(request.items.size());
        parallel_for(request.items.size(), [&](std::size_t i) {
            const BatchItem& item = request.items[i];
            out[i] = detail::surrogate_value(comp, item.words, item.bits, item.codes);
        });
        return out;
    }

private:
    const Catalog& catalog_;
};

// ---------------------------------------------------------------------------
// External estimator process (newline-delimited JSON over stdin/stdout)
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json request_to_json(const BatchRequest& req) {
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    for (const auto& item : req.items) {
        nlohmann::ordered_json codes;
        for (const auto& [name, code] : item.codes) codes[name] = code;
        items.push_back({{"words", item.words}, {"bits", item.bits}, {"codes", std::move(codes)}});
    }
    return {{"batch_id", req.batch_id},
            {"compiler", req.compiler},
            {"objectives", req.objectives},
            {"items", std::move(items)}};
}

}  // namespace detail

// Runs `command` through /bin/sh once; each evaluate() writes one request
// line and blocks for one response line. Submissions are serialized; the
// child is closed down (EOF, then SIGKILL as a last resort) on destruction.
class ExternalBackend : public EstimatorBackend {
public:
    explicit ExternalBackend(std::string command, int timeout_ms = 60000)
        : command_(std::move(command)), timeout_ms_(timeout_ms) {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw BackendError("cannot create pipes for estimator process");
        pid_ = fork();
        if (pid_ < 0) throw BackendError("cannot fork estimator process");
        if (pid_ == 0) {
            setpgid(0, 0);  // own group, so teardown can reach grandchildren
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        setpgid(pid_, pid_);  // mirror the child's setpgid; ignore a lost race
        close(to_child[0]);
        close(from_child[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];
    }

    ExternalBackend(const ExternalBackend&) = delete;
    ExternalBackend& operator=(const ExternalBackend&) = delete;

    ~ExternalBackend() override {
        if (stdin_fd_ >= 0) close(stdin_fd_);
        if (stdout_fd_ >= 0) close(stdout_fd_);
        if (pid_ > 0) {
            int status = 0;
            bool reaped = false;
            for (int i = 0; i < 50 && !reaped; ++i) {
                if (waitpid(pid_, &status, WNOHANG) == pid_) reaped = true;
                else usleep(10000);
            }
            if (!reaped) {
                kill(-pid_, SIGKILL);  // whole group: sh may have forked the tool
                kill(pid_, SIGKILL);
                waitpid(pid_, &status, 0);
            }
        }
    }

    void set_timeout_ms(int ms) { timeout_ms_ = ms; }

    std::vector<ObjectiveVector> evaluate(const BatchRequest& request) override {
        std::lock_guard<std::mutex> lock(mutex_);
        const std::string tag = "batch " + std::to_string(request.batch_id);
        write_line(detail::request_to_json(request).dump() + "\n", tag);
        const std::string line = read_line(tag);

        nlohmann::ordered_json resp;
        try {
            resp = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw BackendError(tag + ": malformed response: " + e.what());
        }
        if (!resp.is_object() || !resp.contains("batch_id") || !resp.contains("ppa"))
            throw BackendError(tag + ": response missing batch_id or ppa");
        if (resp["batch_id"].get<std::uint64_t>() != request.batch_id)
            throw BackendError(tag + ": response carries batch id " + resp["batch_id"].dump());
        const auto& ppa = resp["ppa"];
        if (!ppa.is_array() || ppa.size() != request.items.size())
            throw BackendError(tag + ": expected " + std::to_string(request.items.size()) +
                               " ppa rows, got " + std::to_string(ppa.size()));
        std::vector<ObjectiveVector> out;
        out.reserve(ppa.size());
        for (const auto& row : ppa) {
            if (!row.is_array() || row.size() != request.objectives.size())
                throw BackendError(tag + ": ppa row arity mismatch (expected " +
                                   std::to_string(request.objectives.size()) + " objectives)");
            ObjectiveVector v;
            for (const auto& x : row) {
                if (!x.is_number()) throw BackendError(tag + ": non-numeric ppa value");
                v.push_back(x.get<double>());
            }
            out.push_back(std::move(v));
        }
        return out;
    }

private:
    void write_line(const std::string& data, const std::string& tag) {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = write(stdin_fd_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(tag + ": estimator process is not accepting input (" +
                                   std::strerror(errno) + ")");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(const std::string& tag) {
        while (true) {
            const auto nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{stdout_fd_, POLLIN, 0};
            const int pr = poll(&pfd, 1, timeout_ms_);
            if (pr == 0)
                throw BackendError(tag + ": estimator response timed out after " +
                                   std::to_string(timeout_ms_) + " ms");
            if (pr < 0) {
                if (errno == EINTR) continue;
                throw BackendError(tag + ": poll failed (" + std::string(std::strerror(errno)) + ")");
            }
            char chunk[65536];
            const ssize_t n = read(stdout_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(tag + ": read failed (" + std::string(std::strerror(errno)) + ")");
            }
            if (n == 0) throw BackendError(tag + ": estimator process closed its output");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    std::string command_;
    int timeout_ms_;
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    std::string buffer_;
    std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Batched system evaluation
// ---------------------------------------------------------------------------

// Per-memory ObjectiveVectors for a list of full-system parameterizations.
// All (individual, memory) pairs are flattened, grouped into one batch per
// compiler (compilers in catalog order, pairs in individual-major order
// within a batch), evaluated, and scattered back by pair index.
inline std::vector<std::vector<ObjectiveVector>> evaluate_per_memory(
    const Catalog& catalog, const SystemSpec& sys,
    const std::vector<Parameterization>& parameterizations, EstimatorBackend& backend) {
    const std::size_t n_mem = sys.memories.size();
    std::vector<std::vector<ObjectiveVector>> out(parameterizations.size());
    for (auto& row : out) row.resize(n_mem);

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> groups(
        catalog.compilers.size());
    for (std::size_t i = 0; i < parameterizations.size(); ++i) {
        const Parameterization& p = parameterizations[i];
        if (p.size() != n_mem)
            throw std::invalid_argument("evaluate_per_memory: parameterization " +
                                        std::to_string(i) + " covers " + std::to_string(p.size()) +
                                        " memories, system has " + std::to_string(n_mem));
        for (std::size_t m = 0; m < n_mem; ++m) {
            const int ci = catalog.compiler_index(p[m].compiler);
            if (ci < 0)
                throw ValidationError("evaluate_per_memory: unknown compiler '" + p[m].compiler +
                                      "'");
            groups[static_cast<std::size_t>(ci)].emplace_back(i, m);
        }
    }

    for (std::size_t ci = 0; ci < groups.size(); ++ci) {
        if (groups[ci].empty()) continue;
        const CompilerSpec& comp = catalog.compilers[ci];
        BatchRequest req;
        req.batch_id = backend.allocate_batch_id();
        req.compiler = comp.name;
        req.objectives = catalog.objectives;
        req.items.reserve(groups[ci].size());
        for (const auto& [i, m] : groups[ci]) {
            BatchItem item;
            item.words = sys.memories[m].words;
            item.bits = sys.memories[m].bits;
            item.codes = detail::ordered_codes(comp, parameterizations[i][m]);
            req.items.push_back(std::move(item));
        }
        const std::vector<ObjectiveVector> results = backend.evaluate(req);
        if (results.size() != groups[ci].size())
            throw BackendError("batch " + std::to_string(req.batch_id) + ": backend returned " +
                               std::to_string(results.size()) + " results for " +
                               std::to_string(groups[ci].size()) + " items");
        for (std::size_t k = 0; k < groups[ci].size(); ++k) {
            const auto& [i, m] = groups[ci][k];
            if (results[k].size() != catalog.objectives.size())
                throw BackendError("batch " + std::to_string(req.batch_id) +
                                   ": objective arity mismatch");
            out[i][m] = results[k];
        }
    }
    return out;
}

// System-level objectives: component-wise sum over memories, in memory
// order, one vector per input parameterization (input order preserved).
inline std::vector<ObjectiveVector> batch_evaluate(
    const Catalog& catalog, const SystemSpec& sys,
    const std::vector<Parameterization>& parameterizations, EstimatorBackend& backend) {
    const auto per_memory = evaluate_per_memory(catalog, sys, parameterizations, backend);
    std::vector<ObjectiveVector> out;
    out.reserve(per_memory.size());
    for (const auto& row : per_memory) {
        ObjectiveVector sum(catalog.objectives.size(), 0.0);
        for (const auto& v : row)
            for (std::size_t m = 0; m < sum.size(); ++m) sum[m] += v[m];
        out.push_back(std::move(sum));
    }
    return out;
}

}  // namespace memsys
