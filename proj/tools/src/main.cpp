#include "facespace_cli/cli.hpp"

int main(int argc, char** argv) { return facespace::cli::run_cli(argc, argv); }
