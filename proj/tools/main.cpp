#include "esbid/cli.hpp"

int main(int argc, char** argv) { return esbid::cli::run_cli(argc, argv); }
