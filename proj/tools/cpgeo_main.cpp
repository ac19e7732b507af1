#include "cpgeo/cli.hpp"

int main(int argc, char** argv) { return cpgeo::cli::main_entry(argc, argv); }
