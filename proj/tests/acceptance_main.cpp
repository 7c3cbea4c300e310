#include <cstdlib>
#include <iostream>

#include "symflow/acceptance.hpp"

int main(int argc, char** argv) {
    bool quick = false;
    std::uint64_t seed = 2026;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--quick") quick = true;
        if (a == "--seed" && i + 1 < argc) seed = std::strtoull(argv[++i], nullptr, 10);
    }
    auto rep = symflow::run_acceptance(seed, &std::cout, quick);
    int pass = 0;
    for (const auto& c : rep.claims) pass += c.pass ? 1 : 0;
    std::cout << pass << "/" << rep.claims.size() << " criteria passed\n";
    return rep.all_pass() ? 0 : 1;
}
