#include "mixmin/cli.hpp"

int main(int argc, char** argv) { return mixmin::run_cli(argc, argv); }
