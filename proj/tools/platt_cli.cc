#include "platt/commands.h"

int main(int argc, char** argv) { return platt::CliMain(argc, argv); }
