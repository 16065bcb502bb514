#include "cli_commands.hpp"

int main(int argc, char** argv) { return simdive::cli::run(argc, argv); }
