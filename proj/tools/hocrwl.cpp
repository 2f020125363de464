#include "hocrwl/cli.hpp"

int main(int argc, char** argv) { return hocrwl::run_cli(argc, argv); }
