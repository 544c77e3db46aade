#include "covfield_cli/cli.hpp"

int main(int argc, char** argv) { return covfield::cli::run(argc, argv); }
