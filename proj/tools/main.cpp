#include "crossdiff/cli.hpp"

int main(int argc, char** argv) { return crossdiff::cli_main(argc, argv); }
