#include "easb/cli.hpp"

int main(int argc, char** argv) { return easb::cli::run(argc, argv); }
