#include "anderson/cli.hpp"

int main(int argc, char** argv) { return anderson::cli_main(argc, argv); }
