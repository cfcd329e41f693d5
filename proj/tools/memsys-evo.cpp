#include "memsys/cli.hpp"

int main(int argc, char** argv) { return memsys::run_cli(argc, argv); }
