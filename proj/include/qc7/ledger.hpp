#pragma once

// Residual ledger: named identities with both sides recorded exactly. Each
// entry keeps the sample with the largest |lhs - rhs| (the first sample on
// ties), so a clean entry means every sample vanished.

#include <algorithm>
#include <string>
#include <vector>

#include "qc7/poly.hpp"
#include "qc7/rational.hpp"

namespace qc7 {

struct IdentityResult {
    std::string suite;
    std::string name;
    std::string formula;
    Rational lhs = 0, rhs = 0, residual = 0;
    bool must_pass = true;
    std::size_t samples = 0;
    std::string note;

    bool pass() const { return residual == 0; }
};

class ResidualLedger {
public:
    explicit ResidualLedger(std::string suite = {}) : suite_(std::move(suite)) {}

    void record(const std::string& name, const std::string& formula, const Rational& lhs, const Rational& rhs,
                bool must_pass = true, const std::string& note = {}) {
        IdentityResult& e = entry(name, formula, must_pass, note);
        Rational r = lhs - rhs;
        if (e.samples == 0 || abs(r) > abs(e.residual)) {
            e.lhs = lhs;
            e.rhs = rhs;
            e.residual = r;
        }
        ++e.samples;
    }

    /// Global polynomial identity: the difference must be the zero polynomial.
    /// The recorded lhs is the l1 norm of the difference's coefficients.
    void record_poly(const std::string& name, const std::string& formula, const Poly& difference,
                     bool must_pass = true) {
        Rational l1 = 0;
        for (const auto& [m, c] : difference.terms()) l1 += abs(c);
        record(name, formula, l1, 0, must_pass, "polynomial identity; lhs is the coefficient l1 norm of lhs - rhs");
    }

    void append(const ResidualLedger& other) {
        for (const auto& e : other.entries_) entries_.push_back(e);
    }

    /// Merges entries by name: worst residual wins, sample counts add.
    void absorb(const ResidualLedger& other) {
        for (const auto& o : other.entries_) {
            IdentityResult& e = entry(o.name, o.formula, o.must_pass, o.note);
            if (e.samples == 0 || abs(o.residual) > abs(e.residual)) {
                e.lhs = o.lhs;
                e.rhs = o.rhs;
                e.residual = o.residual;
            }
            e.samples += o.samples;
        }
    }

    const std::vector<IdentityResult>& entries() const { return entries_; }
    const std::string& suite() const { return suite_; }

    const IdentityResult* find(const std::string& name) const {
        for (const auto& e : entries_)
            if (e.name == name) return &e;
        return nullptr;
    }

    bool must_pass_ok() const {
        return std::all_of(entries_.begin(), entries_.end(), [](const IdentityResult& e) { return !e.must_pass || e.pass(); });
    }

    std::vector<std::string> failures() const {
        std::vector<std::string> out;
        for (const auto& e : entries_)
            if (e.must_pass && !e.pass()) out.push_back(e.name);
        return out;
    }

private:
    IdentityResult& entry(const std::string& name, const std::string& formula, bool must_pass, const std::string& note) {
        for (auto& e : entries_)
            if (e.name == name) return e;
        IdentityResult e;
        e.suite = suite_;
        e.name = name;
        e.formula = formula;
        e.must_pass = must_pass;
        e.note = note;
        entries_.push_back(std::move(e));
        return entries_.back();
    }

    std::string suite_;
    std::vector<IdentityResult> entries_;
};

}  // namespace qc7
