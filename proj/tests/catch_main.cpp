// Single compiled TU for the amalgamated Catch2 distribution (provides main).
#include <catch2/catch_amalgamated.cpp>
