// Runs the pointwise Ricci-identity suite on the flat Heisenberg model and
// prints one line per identity.

#include <iostream>

#include "qc7/qc7.hpp"

int main() {
    using namespace qc7;
    QcModel h = build_heisenberg7();
    auto fs = random_functions(h, 3, 5, 4);
    auto pts = model_points(h, 4, 3);
    ResidualLedger l = ricci_identity_suite(h, fs, pts);
    for (const auto& e : l.entries())
        std::cout << (e.pass() ? "pass " : "FAIL ") << e.name << " (" << e.samples << " samples): " << e.formula << "\n";
    ScalarCalculus calc(h);
    std::cout << "Delta x1^2 = " << calc.jet(parse_poly("x1^2")).sublap.to_string() << "\n";
    std::cout << "P_f(grad f) for f = x1^3: " << calc.p_form(calc.jet(parse_poly("x1^3"))).p_function.to_string() << "\n";
    return l.must_pass_ok() ? 0 : 1;
}
