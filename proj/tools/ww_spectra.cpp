#include "wwspectra/app.hpp"

int main(int argc, char** argv) { return ww::app::main(argc, argv); }
