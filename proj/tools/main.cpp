#include <iostream>

#include "img2uml/cli.hpp"

int main(int argc, char** argv) { return img2uml::cli::run(argc, argv, std::cout, std::cerr); }
