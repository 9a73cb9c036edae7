#include "shear/sweep.hpp"

int main(int argc, char** argv) { return shear::run_cli(argc, argv); }
