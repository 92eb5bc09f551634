#include "qc7/cli.hpp"

int main(int argc, char** argv) { return qc7::cli::run(argc, argv); }
