#include "omegastop/cli.hpp"

int main(int argc, char** argv) { return omegastop::cli::run(argc, argv); }
