#include "gtminor/cli.hpp"

int main(int argc, char** argv) { return gtminor::cli::run(argc, argv); }
