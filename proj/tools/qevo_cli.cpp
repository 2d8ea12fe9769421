#include "qevo/cli.hpp"

int main(int argc, char** argv) { return qevo::cli::run_command(argc, argv); }
