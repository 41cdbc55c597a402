#include "hsflow/cli.hpp"

int main(int argc, char** argv) { return hsflow::cli_main(argc, argv); }
