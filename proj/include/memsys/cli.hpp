#pragma once

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memsys/baseline.hpp"
#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/engine.hpp"
#include "memsys/estimator.hpp"
#include "memsys/metrics.hpp"
#include "memsys/plot.hpp"
#include "memsys/report.hpp"

namespace memsys {

namespace cli_detail {

namespace fs = std::filesystem;

inline std::unique_ptr<EstimatorBackend> make_backend(const std::string& spec,
                                                      const Catalog& catalog) {
    if (spec == "surrogate") return std::make_unique<SurrogateBackend>(catalog);
    if (spec.rfind("exec:", 0) == 0) {
        const std::string cmd = spec.substr(5);
        if (cmd.empty()) throw ValidationError("--backend exec: requires a command after 'exec:'");
        return std::make_unique<ExternalBackend>(cmd);
    }
    throw ValidationError("unknown backend '" + spec + "' (expected 'surrogate' or 'exec:CMD')");
}

inline std::vector<std::string> split_grid(const std::string& s, const std::string& flag) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) parts.push_back(cur);
    if (parts.empty() || s.empty())
        throw ValidationError(flag + ": empty grid");
    return parts;
}

inline std::vector<double> parse_double_grid(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    for (const auto& p : split_grid(s, flag)) {
        try {
            std::size_t used = 0;
            const double v = std::stod(p, &used);
            if (used != p.size()) throw std::invalid_argument(p);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError(flag + ": '" + p + "' is not a number");
        }
    }
    return out;
}

inline std::vector<std::size_t> parse_size_grid(const std::string& s, const std::string& flag) {
    std::vector<std::size_t> out;
    for (const auto& p : split_grid(s, flag)) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(p, &used);
            if (used != p.size() || v < 0) throw std::invalid_argument(p);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ValidationError(flag + ": '" + p + "' is not a non-negative integer");
        }
    }
    return out;
}

struct CommonArgs {
    std::string catalog_path;
    std::string system_path;
    std::string out_dir;
    std::string backend = "surrogate";
    std::size_t pop = 20;
    std::size_t gens = 50;
    double cr = 0.9;
    double f = 0.8;
    std::uint64_t seed = 1;
    std::size_t repeats = 3;
    std::uint64_t cap = kDefaultComboCap;
    std::string baseline_path;
};

inline nlohmann::ordered_json manifest_base(const std::string& command, const CommonArgs& a,
                                            const std::string& started,
                                            const std::string& finished) {
    nlohmann::ordered_json m;
    m["tool"] = "memsys-evo";
    m["version"] = kVersion;
    m["command"] = command;
    if (!a.catalog_path.empty()) m["catalog"] = a.catalog_path;
    if (!a.system_path.empty()) m["system"] = a.system_path;
    m["out"] = a.out_dir;
    m["backend"] = a.backend;
    m["threads"] = worker_count();
    m["started_utc"] = started;
    m["finished_utc"] = finished;
    return m;
}

inline void write_manifest(const CommonArgs& a, nlohmann::ordered_json manifest) {
    atomic_write_file(fs::path(a.out_dir) / "manifest.json", manifest.dump(2) + "\n");
}

inline int cmd_optimize(const CommonArgs& a) {
    const Catalog catalog = load_catalog(a.catalog_path);
    const SystemSpec sys = load_system(a.system_path);
    if (a.repeats < 1) throw ValidationError("--repeats must be >= 1");
    fs::create_directories(a.out_dir);
    const auto backend = make_backend(a.backend, catalog);
    const std::string started = utc_now_string();

    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < a.repeats; ++k) {
        DeConfig cfg;
        cfg.pop_size = a.pop;
        cfg.generations = a.gens;
        cfg.cr = a.cr;
        cfg.f = a.f;
        cfg.seed = a.seed + k;
        const RunResult result = run_optimization(catalog, sys, cfg, *backend);

        const std::string front_json = "front_r" + std::to_string(k) + ".json";
        const std::string front_csv = "front_r" + std::to_string(k) + ".csv";
        const std::string history_csv = "history_r" + std::to_string(k) + ".csv";
        atomic_write_file(fs::path(a.out_dir) / front_json,
                          front_to_json(catalog, result.final_front).dump(2) + "\n");
        atomic_write_file(fs::path(a.out_dir) / front_csv,
                          front_to_csv(catalog, sys, result.final_front));
        atomic_write_file(fs::path(a.out_dir) / history_csv,
                          history_to_csv(catalog, result.history));

        std::cout << "repeat " << k << " (seed " << cfg.seed << "): front size "
                  << result.final_front.size() << ", " << result.evaluations_used
                  << " evaluation slots, " << result.wall_time_seconds << " s\n";
        runs.push_back({{"seed", cfg.seed},
                        {"front_json", front_json},
                        {"front_csv", front_csv},
                        {"history_csv", history_csv},
                        {"front_size", result.final_front.size()},
                        {"evaluation_slots", result.evaluations_used},
                        {"wall_time_seconds", result.wall_time_seconds}});
    }

    nlohmann::ordered_json m = manifest_base("optimize", a, started, utc_now_string());
    m["config"] = {{"pop", a.pop},     {"gens", a.gens},       {"cr", a.cr},
                   {"f", a.f},         {"seed", a.seed},       {"repeats", a.repeats}};
    m["runs"] = std::move(runs);
    write_manifest(a, std::move(m));
    return 0;
}

inline int cmd_exhaustive(const CommonArgs& a) {
    const Catalog catalog = load_catalog(a.catalog_path);
    const SystemSpec sys = load_system(a.system_path);
    fs::create_directories(a.out_dir);
    const auto backend = make_backend(a.backend, catalog);
    const std::string started = utc_now_string();

    const CandidateTable table = enumerate_candidates(catalog, sys, *backend);
    const std::vector<FrontPoint> front = exhaustive_front(table, a.cap);
    const std::vector<FrontEntry> entries = baseline_front_entries(table, front);
    atomic_write_file(fs::path(a.out_dir) / "front.json",
                      front_to_json(catalog, entries).dump(2) + "\n");
    atomic_write_file(fs::path(a.out_dir) / "front.csv", front_to_csv(catalog, sys, entries));

    std::size_t candidates = 0;
    for (const auto& c : table.per_memory) candidates += c.size();
    std::cout << "candidates: " << candidates << " across " << sys.memories.size()
              << " memories; combinations: " << u128_to_string(count_combinations(table))
              << "; front size " << front.size() << "\n";

    nlohmann::ordered_json m = manifest_base("exhaustive", a, started, utc_now_string());
    m["cap"] = a.cap;
    m["candidates"] = candidates;
    m["combinations"] = u128_to_string(count_combinations(table));
    m["front_size"] = front.size();
    write_manifest(a, std::move(m));
    return 0;
}

inline int cmd_compare(const CommonArgs& a, const std::vector<std::string>& found_paths) {
    fs::create_directories(a.out_dir);
    const std::string started = utc_now_string();
    auto [objectives, base] = read_front_json(a.baseline_path);
    std::vector<std::vector<ObjectiveVector>> found;
    for (const auto& path : found_paths) {
        auto [objs, points] = read_front_json(path);
        if (objs != objectives)
            throw ValidationError("'" + path + "': objectives differ from the baseline front");
        found.push_back(std::move(points));
    }
    const DeviationReport report = deviation_report(found, base, objectives);
    const std::string md = deviation_report_markdown(report);
    atomic_write_file(fs::path(a.out_dir) / "deviation.csv", deviation_report_csv(report));
    atomic_write_file(fs::path(a.out_dir) / "deviation.md", md);
    std::cout << md;

    nlohmann::ordered_json m = manifest_base("compare", a, started, utc_now_string());
    m["baseline"] = a.baseline_path;
    m["found"] = found_paths;
    write_manifest(a, std::move(m));
    return 0;
}

inline int cmd_sweep(const CommonArgs& a, const std::string& f_grid, const std::string& cr_grid,
                     const std::string& pop_grid, const std::string& gens_grid) {
    const Catalog catalog = load_catalog(a.catalog_path);
    const SystemSpec sys = load_system(a.system_path);
    if (a.repeats < 1) throw ValidationError("--repeats must be >= 1");
    fs::create_directories(a.out_dir);
    const auto backend = make_backend(a.backend, catalog);
    const std::string started = utc_now_string();

    const std::vector<double> fs_v = parse_double_grid(f_grid, "--f");
    const std::vector<double> crs = parse_double_grid(cr_grid, "--cr");
    const std::vector<std::size_t> pops = parse_size_grid(pop_grid, "--pop");
    const std::vector<std::size_t> genss = parse_size_grid(gens_grid, "--gens");

    std::ostringstream csv;
    csv << "f,cr,pop,gens";
    for (const auto& obj : catalog.objectives)
        csv << "," << obj << "_min," << obj << "_mean," << obj << "_max";
    csv << "\n";

    std::size_t cells = 0;
    for (double f : fs_v) {
        for (double cr : crs) {
            for (std::size_t pop : pops) {
                for (std::size_t gens : genss) {
                    const std::size_t arity = catalog.objectives.size();
                    std::vector<double> acc_min(arity, 0), acc_mean(arity, 0), acc_max(arity, 0);
                    for (std::size_t k = 0; k < a.repeats; ++k) {
                        DeConfig cfg{pop, gens, f, cr, a.seed + k};
                        const RunResult r = run_optimization(catalog, sys, cfg, *backend);
                        std::vector<ObjectiveVector> objs;
                        objs.reserve(r.final_front.size());
                        for (const auto& [params, o] : r.final_front) objs.push_back(o);
                        const FrontStats stats = front_stats(objs);
                        for (std::size_t m = 0; m < arity; ++m) {
                            acc_min[m] += stats.per_objective[m].min;
                            acc_mean[m] += stats.per_objective[m].mean;
                            acc_max[m] += stats.per_objective[m].max;
                        }
                    }
                    csv << detail::format_g17(f) << "," << detail::format_g17(cr) << "," << pop
                        << "," << gens;
                    const double reps = static_cast<double>(a.repeats);
                    for (std::size_t m = 0; m < arity; ++m)
                        csv << "," << detail::format_g17(acc_min[m] / reps) << ","
                            << detail::format_g17(acc_mean[m] / reps) << ","
                            << detail::format_g17(acc_max[m] / reps);
                    csv << "\n";
                    ++cells;
                    std::cout << "config f=" << f << " cr=" << cr << " pop=" << pop
                              << " gens=" << gens << " done\n";
                }
            }
        }
    }
    atomic_write_file(fs::path(a.out_dir) / "sweep.csv", csv.str());

    nlohmann::ordered_json m = manifest_base("sweep", a, started, utc_now_string());
    m["grids"] = {{"f", f_grid}, {"cr", cr_grid}, {"pop", pop_grid}, {"gens", gens_grid}};
    m["repeats"] = a.repeats;
    m["seed"] = a.seed;
    m["configurations"] = cells;
    write_manifest(a, std::move(m));
    return 0;
}

inline int cmd_plot(const CommonArgs& a, const std::vector<std::string>& front_paths) {
    fs::create_directories(a.out_dir);
    const std::string started = utc_now_string();

    std::vector<PlotSeries> series;
    std::vector<std::string> objectives;
    int baseline_index = -1;
    auto add_file = [&](const std::string& path, const std::string& label) {
        auto [objs, points] = read_front_json(path);
        if (objectives.empty())
            objectives = objs;
        else if (objs != objectives)
            throw ValidationError("'" + path + "': objectives differ from the first front file");
        PlotSeries s;
        s.label = label;
        for (const auto& p : points) s.points.emplace_back(p[0], p[1]);
        series.push_back(std::move(s));
    };
    if (!a.baseline_path.empty()) {
        baseline_index = 0;
        add_file(a.baseline_path, "baseline (" + fs::path(a.baseline_path).stem().string() + ")");
    }
    for (const auto& path : front_paths) add_file(path, fs::path(path).stem().string());
    if (series.empty()) throw ValidationError("plot: no front files given");
    if (objectives.size() > 2)
        std::cerr << "warning: " << objectives.size() << " objectives; plotting '" << objectives[0]
                  << "' and '" << objectives[1] << "' only\n";

    const std::string svg =
        render_scatter_svg(series, baseline_index, objectives[0], objectives[1]);
    atomic_write_file(fs::path(a.out_dir) / "plot.svg", svg);
    std::cout << "wrote " << (fs::path(a.out_dir) / "plot.svg").string() << "\n";

    nlohmann::ordered_json m = manifest_base("plot", a, started, utc_now_string());
    if (!a.baseline_path.empty()) m["baseline"] = a.baseline_path;
    m["fronts"] = front_paths;
    write_manifest(a, std::move(m));
    return 0;
}

inline int cmd_generate(const CommonArgs& a, std::size_t n_memories, std::size_t n_compilers,
                        std::uint64_t target) {
    fs::create_directories(a.out_dir);
    const std::string started = utc_now_string();
    const auto [catalog, sys] = generate_synthetic_system(a.seed, n_memories, n_compilers, target);
    atomic_write_file(fs::path(a.out_dir) / "catalog.json", catalog_to_json(catalog).dump(2) + "\n");
    atomic_write_file(fs::path(a.out_dir) / "system.json", system_to_json(sys).dump(2) + "\n");
    for (const auto& mem : sys.memories)
        std::cout << mem.id << ": " << mem.words << "x" << mem.bits << ", "
                  << count_memory_candidates(catalog, mem) << " candidates\n";

    CommonArgs b = a;
    nlohmann::ordered_json m = manifest_base("generate", b, started, utc_now_string());
    m["seed"] = a.seed;
    m["memories"] = n_memories;
    m["compilers"] = n_compilers;
    m["candidates_per_memory_target"] = target;
    write_manifest(b, std::move(m));
    return 0;
}

// Speaks the estimator wire protocol on stdin/stdout using the catalog's
// surrogate model; usable as `--backend "exec:memsys-evo serve --catalog C"`.
inline int cmd_serve(const std::string& catalog_path) {
    const Catalog catalog = load_catalog(catalog_path);
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        nlohmann::ordered_json req;
        try {
            req = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            std::cout << "{\"error\":\"malformed request\"}\n" << std::flush;
            continue;
        }
        try {
            const std::uint64_t batch_id = req.at("batch_id").get<std::uint64_t>();
            const std::string comp_name = req.at("compiler").get<std::string>();
            const int ci = catalog.compiler_index(comp_name);
            if (ci < 0) throw ValidationError("unknown compiler '" + comp_name + "'");
            const CompilerSpec& comp = catalog.compilers[static_cast<std::size_t>(ci)];
            nlohmann::ordered_json ppa = nlohmann::ordered_json::array();
            for (const auto& item : req.at("items")) {
                const std::int64_t words = item.at("words").get<std::int64_t>();
                const std::int64_t bits = item.at("bits").get<std::int64_t>();
                const auto& jcodes = item.at("codes");
                std::vector<std::pair<std::string, int>> codes;
                codes.reserve(comp.params.size());
                for (const auto& p : comp.params) {
                    if (!jcodes.contains(p.name))
                        throw ValidationError("item missing code for parameter '" + p.name + "'");
                    codes.emplace_back(p.name, jcodes[p.name].get<int>());
                }
                ppa.push_back(detail::surrogate_value(comp, words, bits, codes));
            }
            const nlohmann::ordered_json resp{{"batch_id", batch_id}, {"ppa", std::move(ppa)}};
            std::cout << resp.dump() << "\n" << std::flush;
        } catch (const std::exception& e) {
            nlohmann::ordered_json err{{"error", e.what()}};
            if (req.is_object() && req.contains("batch_id")) err["batch_id"] = req["batch_id"];
            std::cout << err.dump() << "\n" << std::flush;
        }
    }
    return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
    using namespace cli_detail;
    CLI::App app{"System-wide memory parameterization explorer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonArgs args;
    std::vector<std::string> found_paths;
    std::vector<std::string> plot_paths;
    std::string f_grid = "0.8", cr_grid = "0.9", pop_grid = "20", gens_grid = "50";
    std::size_t gen_memories = 4, gen_compilers = 3;
    std::uint64_t gen_target = 200;

    auto add_io = [&](CLI::App* sub, bool need_system) {
        sub->add_option("--catalog", args.catalog_path, "memory compiler catalog JSON")
            ->required();
        if (need_system)
            sub->add_option("--system", args.system_path, "system requirements JSON")->required();
        sub->add_option("--out", args.out_dir, "output directory")->required();
        sub->add_option("--backend", args.backend, "'surrogate' or 'exec:CMD'");
    };

    CLI::App* optimize = app.add_subcommand("optimize", "evolve parameterizations toward the front");
    add_io(optimize, true);
    optimize->add_option("--pop", args.pop, "population size");
    optimize->add_option("--gens", args.gens, "generation count");
    optimize->add_option("--cr", args.cr, "crossover rate");
    optimize->add_option("--f", args.f, "differential weight");
    optimize->add_option("--seed", args.seed, "base random seed");
    optimize->add_option("--repeats", args.repeats, "repetitions with seeds seed, seed+1, ...");

    CLI::App* exhaustive = app.add_subcommand("exhaustive", "enumerate the full design space");
    add_io(exhaustive, true);
    exhaustive->add_option("--cap", args.cap, "combination count cap");

    CLI::App* compare = app.add_subcommand("compare", "deviation report of fronts vs a baseline");
    compare->add_option("--baseline", args.baseline_path, "baseline front JSON")->required();
    compare->add_option("--out", args.out_dir, "output directory")->required();
    compare->add_option("found", found_paths, "found front JSON files")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over DE hyperparameters");
    add_io(sweep, true);
    sweep->add_option("--f", f_grid, "comma-separated F grid");
    sweep->add_option("--cr", cr_grid, "comma-separated CR grid");
    sweep->add_option("--pop", pop_grid, "comma-separated population grid");
    sweep->add_option("--gens", gens_grid, "comma-separated generation grid");
    sweep->add_option("--seed", args.seed, "base random seed");
    sweep->add_option("--repeats", args.repeats, "repetitions per configuration");

    CLI::App* plot = app.add_subcommand("plot", "SVG scatter of front files");
    plot->add_option("--out", args.out_dir, "output directory")->required();
    plot->add_option("--baseline", args.baseline_path, "baseline front JSON (normalizes axes)");
    plot->add_option("fronts", plot_paths, "front JSON files");

    CLI::App* generate = app.add_subcommand("generate", "synthesize a catalog + system pair");
    generate->add_option("--out", args.out_dir, "output directory")->required();
    generate->add_option("--seed", args.seed, "generator seed");
    generate->add_option("--memories", gen_memories, "memory count");
    generate->add_option("--compilers", gen_compilers, "compiler count");
    generate->add_option("--target", gen_target, "candidate count target per memory");

    CLI::App* serve = app.add_subcommand("serve", "estimator protocol server on stdin/stdout");
    serve->add_option("--catalog", args.catalog_path, "memory compiler catalog JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(args);
        if (exhaustive->parsed()) return cmd_exhaustive(args);
        if (compare->parsed()) return cmd_compare(args, found_paths);
        if (sweep->parsed()) return cmd_sweep(args, f_grid, cr_grid, pop_grid, gens_grid);
        if (plot->parsed()) return cmd_plot(args, plot_paths);
        if (generate->parsed()) return cmd_generate(args, gen_memories, gen_compilers, gen_target);
        if (serve->parsed()) return cmd_serve(args.catalog_path);
        return 1;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const BackendError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace memsys
