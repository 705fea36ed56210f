#include "forel/cli.hpp"

int main(int argc, char** argv) { return forel::RunMain(argc, argv); }
