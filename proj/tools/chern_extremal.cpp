#include "chern_extremal/cli.hpp"

int main(int argc, char** argv) { return chern_extremal::cli::run(argc, argv); }
