#include <iostream>

#include "mealrec/cli.hpp"

int main(int argc, char** argv) { return mealrec::run_cli(argc, argv, std::cout, std::cerr); }
