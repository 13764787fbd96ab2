#include "minatt/cli.hpp"

int main(int argc, char** argv) { return minatt::run_cli(argc, argv); }
