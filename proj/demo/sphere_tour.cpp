// Walks through the sphere model: first eigenfunction, a P-form, the
// degree-1 spectra and the Lichnerowicz bound.

#include <iostream>

#include "qc7/qc7.hpp"

int main() {
    using namespace qc7;
    QcModel m = build_sphere7();
    ScalarCalculus calc(m);
    std::cout << "convention: " << m.convention.multiplication << " multiplication, xi_sign " << m.convention.xi_sign
              << ", i_sign " << m.convention.i_sign << "\n";
    std::cout << "S = " << m.S << "\n";

    ScalarFieldJet x1 = calc.jet(Poly::variable(0));
    std::cout << "Delta x1 = " << x1.sublap.to_string() << "\n";
    std::cout << "xi_1 x1 = " << x1.xi_derivs[0].to_string() << "\n";

    Poly f = parse_poly("x1^2 - x2*x3");
    PFormData pd = calc.p_form(calc.jet(f));
    std::cout << "f = " << f.to_string() << ": -int P_f(grad f) = " << to_pq(*pd.p_integral)
              << ", int f Cf = " << to_pq(*pd.f_cf_integral) << "\n";

    SpectralProblem p = assemble(m, 1);
    for (Operator op : {Operator::sub_laplacian, Operator::riemannian})
        for (const auto& row : solve_spectrum(calc, p, op, 1e-12))
            std::cout << (op == Operator::sub_laplacian ? "sub-Laplacian" : "Riemannian") << " eigenvalue "
                      << to_pq(*row.exact) << " multiplicity " << row.multiplicity
                      << (row.certified ? " (certified)" : "") << "\n";

    LichnerowiczResult lr = lichnerowicz_k0(m, sample_rational_points(1, 5));
    std::cout << "k0 = " << to_pq(lr.k0) << ", bound k0/3 = " << to_pq(lr.bound) << "\n";

    ExtremalResult ex = extremal_check(calc, Poly::variable(0), 4, lr.k0);
    std::cout << ex.entry.id << ": " << ex.entry.verdict << "\n";
    return ex.pass() ? 0 : 1;
}
