#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <litkg/pipeline.hpp>

int main(int argc, char** argv) {
    litkg::set_quiet_logging(true);
    doctest::Context context(argc, argv);
    return context.run();
}
