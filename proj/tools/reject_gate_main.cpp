#include "rejgate/cli.hpp"

int main(int argc, char** argv) { return rejgate::cli::run(argc, argv); }
