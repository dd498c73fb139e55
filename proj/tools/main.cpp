#include <iostream>

#include "gossip/cli.hpp"

int main(int argc, char** argv) { return gossip::cli::run(argc, argv, std::cout, std::cerr); }
