#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdlib>

#include <spdlog/spdlog.h>

int main(int argc, char** argv) {
    // Degradation paths log warnings by design; keep test output readable.
    spdlog::set_level(std::getenv("SOCIAL_TEST_LOG") ? spdlog::level::debug : spdlog::level::off);
    doctest::Context ctx(argc, argv);
    return ctx.run();
}
