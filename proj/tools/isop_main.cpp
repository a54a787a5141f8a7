#include "isop/cli.hpp"

int main(int argc, char** argv) { return isop::cli_main(argc, argv); }
