#include "vid/cli.hpp"

int main(int argc, char** argv) {
    return vid::run_cli(argc, argv);
}
