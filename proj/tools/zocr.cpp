#include <zocr/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return zocr::cli::run(argc, argv, std::cout, std::cerr);
}
