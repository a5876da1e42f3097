#include "agvcost/harness.hpp"

int main(int argc, char** argv) {
    return agvcost::run_cli(argc, argv);
}
