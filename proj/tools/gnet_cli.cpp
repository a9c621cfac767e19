#include "gnet/io.hpp"

int main(int argc, char** argv) { return gnet::cli_main(argc, argv); }
