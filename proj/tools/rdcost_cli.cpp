#include <iostream>

#include "rdcost/pipeline.hpp"

int main(int argc, char** argv) { return rdcost::run_cli(argc, argv, std::cerr); }
