#pragma once

// Pi / S engine for pseudo-exponential constructions.
//
//   Pi(p)  = [ C_b exp(M_b(p)) Chat_b ]_b          (blocks side by side)
//   S(p)   = S0 + sum_terms sign * C_b E_b R E_b^* C_b^*
//   M_b(p) = sum_j phi_j(p) A_j                    (A_j pairwise commuting)
//
// Because the A_j commute, d_v exp(M) = (d_v M) exp(M) and every derivative
// below is closed form. Derivatives of S come in two flavours: the rule path
// (finite sums of Pi-derivatives, which is what the node identities buy) and a
// direct path that differentiates E R E^* without using any identity.

#include "pexp/numkernel.hpp"
#include "pexp/snode.hpp"

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pexp {

inline constexpr std::size_t kMaxVars = 3;
using Point = std::array<double, kMaxVars>;

class UnsupportedDerivative : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Partial-derivative counts per variable.
struct MultiIndex {
    std::array<int, kMaxVars> count{};

    static MultiIndex none() { return {}; }
    static MultiIndex of(std::size_t v) {
        MultiIndex m;
        m.count.at(v) += 1;
        return m;
    }
    static MultiIndex of(std::size_t v, std::size_t w) { return of(v).plus(w); }

    MultiIndex plus(std::size_t v) const {
        MultiIndex m = *this;
        m.count.at(v) += 1;
        return m;
    }
    int order() const { return count[0] + count[1] + count[2]; }

    /// Expanded variable list, e.g. d_x d_x d_t -> {0, 0, 1}.
    std::vector<std::size_t> variables() const {
        std::vector<std::size_t> out;
        for (std::size_t v = 0; v < kMaxVars; ++v)
            for (int k = 0; k < count[v]; ++k) out.push_back(v);
        return out;
    }
    bool operator==(const MultiIndex&) const = default;
};

/// Complex polynomial of total degree <= 2 in the (real) scenario variables:
///   c + sum_v l_v p_v + sum_{v,w} q_vw p_v p_w,   q symmetric.
class Polynomial {
public:
    Polynomial() = default;
    static Polynomial constant(Complex c) {
        Polynomial p;
        p.c_ = c;
        return p;
    }
    static Polynomial variable(std::size_t v, Complex coef = 1.0) {
        Polynomial p;
        p.l_.at(v) = coef;
        return p;
    }
    static Polynomial product(std::size_t v, std::size_t w, Complex coef = 1.0) {
        Polynomial p;
        p.q_.at(v).at(w) += coef * 0.5;
        p.q_.at(w).at(v) += coef * 0.5;
        return p;
    }

    Polynomial operator+(const Polynomial& o) const {
        Polynomial p = *this;
        p.c_ += o.c_;
        for (std::size_t v = 0; v < kMaxVars; ++v) {
            p.l_[v] += o.l_[v];
            for (std::size_t w = 0; w < kMaxVars; ++w) p.q_[v][w] += o.q_[v][w];
        }
        return p;
    }
    Polynomial operator-(const Polynomial& o) const { return *this + o * Complex(-1.0); }
    Polynomial operator*(Complex s) const {
        Polynomial p = *this;
        p.c_ *= s;
        for (std::size_t v = 0; v < kMaxVars; ++v) {
            p.l_[v] *= s;
            for (std::size_t w = 0; w < kMaxVars; ++w) p.q_[v][w] *= s;
        }
        return p;
    }

    Complex value(const Point& p) const {
        Complex s = c_;
        for (std::size_t v = 0; v < kMaxVars; ++v) {
            s += l_[v] * p[v];
            for (std::size_t w = 0; w < kMaxVars; ++w) s += q_[v][w] * p[v] * p[w];
        }
        return s;
    }
    Complex derivative(std::size_t v, const Point& p) const {
        Complex s = l_.at(v);
        for (std::size_t w = 0; w < kMaxVars; ++w) s += 2.0 * q_[v][w] * p[w];
        return s;
    }
    Complex second_derivative(std::size_t v, std::size_t w) const { return 2.0 * q_.at(v).at(w); }

private:
    Complex c_{0.0};
    std::array<Complex, kMaxVars> l_{};
    std::array<std::array<Complex, kMaxVars>, kMaxVars> q_{};
};

struct ExponentTerm {
    Polynomial coefficient;
    CMatrix matrix;
};

/// M(p) = sum_j phi_j(p) A_j with pairwise commuting A_j.
class ExponentRecipe {
public:
    ExponentRecipe() = default;
    explicit ExponentRecipe(std::vector<ExponentTerm> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw std::invalid_argument("ExponentRecipe: no terms");
        dim_ = terms_.front().matrix.rows();
        for (const auto& t : terms_) {
            require_square(t.matrix, "ExponentRecipe term");
            if (t.matrix.rows() != dim_) throw DimensionError("ExponentRecipe: term sizes differ");
            require_finite(t.matrix, "ExponentRecipe term");
        }
        for (std::size_t i = 0; i < terms_.size(); ++i)
            for (std::size_t k = i + 1; k < terms_.size(); ++k) {
                const auto& a = terms_[i].matrix;
                const auto& b = terms_[k].matrix;
                if (commutator(a, b).norm() > kCommutatorRelTol * std::max(1.0, a.norm() * b.norm()))
                    throw std::invalid_argument("ExponentRecipe: exponent matrices do not commute");
            }
    }

    Eigen::Index dim() const noexcept { return dim_; }
    const std::vector<ExponentTerm>& terms() const noexcept { return terms_; }

    CMatrix generator(const Point& p) const {
        CMatrix m = CMatrix::Zero(dim_, dim_);
        for (const auto& t : terms_) m += t.coefficient.value(p) * t.matrix;
        return m;
    }
    CMatrix generator_derivative(std::size_t v, const Point& p) const {
        CMatrix m = CMatrix::Zero(dim_, dim_);
        for (const auto& t : terms_) m += t.coefficient.derivative(v, p) * t.matrix;
        return m;
    }
    CMatrix generator_second_derivative(std::size_t v, std::size_t w) const {
        CMatrix m = CMatrix::Zero(dim_, dim_);
        for (const auto& t : terms_) m += t.coefficient.second_derivative(v, w) * t.matrix;
        return m;
    }

private:
    std::vector<ExponentTerm> terms_;
    Eigen::Index dim_ = 0;
};

struct PiBlock {
    CMatrix c;
    ExponentRecipe recipe;
    CMatrix chat;
};

/// sign * C_b E_b R E_b^* C_b^*, sharing C and the exponent with Pi block b.
struct STerm {
    int sign = 1;
    std::size_t block = 0;
    CMatrix r;
};

/// coef * (d^left Pi_b) nu (d^right Pi_b)^*; empty nu means identity.
struct RuleTerm {
    Complex coefficient{1.0};
    std::size_t block = 0;
    MultiIndex left;
    CMatrix nu;
    MultiIndex right;
};
using SRule = std::vector<RuleTerm>;

class PseudoExpFamily {
public:
    PseudoExpFamily() = default;
    PseudoExpFamily(std::vector<std::string> variables, std::vector<PiBlock> blocks, std::vector<STerm> s_terms,
                    CMatrix s0, std::vector<SRule> rules)
        : variables_(std::move(variables)),
          blocks_(std::move(blocks)),
          s_terms_(std::move(s_terms)),
          s0_(std::move(s0)),
          rules_(std::move(rules)) {
        if (variables_.empty() || variables_.size() > kMaxVars)
            throw std::invalid_argument("PseudoExpFamily: 1 to 3 variables");
        if (blocks_.empty()) throw std::invalid_argument("PseudoExpFamily: no Pi blocks");
        const Eigen::Index n = blocks_.front().c.rows();
        for (const auto& b : blocks_) {
            if (b.c.rows() != n) throw DimensionError("PseudoExpFamily: Pi blocks must share the row count");
            if (b.c.cols() != b.recipe.dim() || b.chat.rows() != b.recipe.dim())
                throw DimensionError("PseudoExpFamily: C, exponent and Chat sizes disagree");
            require_finite(b.c, "C");
            require_finite(b.chat, "Chat");
        }
        if (!s_terms_.empty() || s0_.size() != 0) {
            if (s0_.rows() != n || s0_.cols() != n) throw DimensionError("PseudoExpFamily: S0 must be n x n");
            if (hermitian_defect(s0_) > kHermitianRelTol * s0_.norm())
                throw std::invalid_argument("PseudoExpFamily: S0 must be Hermitian");
        }
        for (const auto& t : s_terms_) {
            if (t.block >= blocks_.size()) throw std::out_of_range("STerm block index");
            const auto d = blocks_[t.block].recipe.dim();
            if (t.r.rows() != d || t.r.cols() != d) throw DimensionError("STerm: R must match its block");
            if (hermitian_defect(t.r) > kHermitianRelTol * t.r.norm())
                throw std::invalid_argument("STerm: R must be Hermitian");
            if (t.sign != 1 && t.sign != -1) throw std::invalid_argument("STerm: sign must be +1 or -1");
        }
        rules_.resize(variables_.size());
        for (const auto& rule : rules_)
            for (const auto& term : rule)
                if (term.block >= blocks_.size()) throw std::out_of_range("RuleTerm block index");
    }

    std::size_t num_vars() const noexcept { return variables_.size(); }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    const std::vector<PiBlock>& blocks() const noexcept { return blocks_; }
    const std::vector<STerm>& s_terms() const noexcept { return s_terms_; }
    const CMatrix& s0() const noexcept { return s0_; }
    const std::vector<SRule>& rules() const noexcept { return rules_; }
    bool has_s() const noexcept { return s0_.size() != 0; }
    Eigen::Index rows() const { return blocks_.front().c.rows(); }

private:
    std::vector<std::string> variables_;
    std::vector<PiBlock> blocks_;
    std::vector<STerm> s_terms_;
    CMatrix s0_;
    std::vector<SRule> rules_;
};

/// All exponentials of a family at one point, plus closed-form derivatives.
class FamilyPoint {
public:
    FamilyPoint(const PseudoExpFamily& family, const Point& p) : family_(&family), point_(p) {
        for (const auto& b : family.blocks()) {
            BlockCache cache;
            cache.e = mat_exp(b.recipe.generator(p));
            for (std::size_t v = 0; v < family.num_vars(); ++v)
                cache.m_d.push_back(b.recipe.generator_derivative(v, p));
            blocks_.push_back(std::move(cache));
        }
    }

    const PseudoExpFamily& family() const { return *family_; }
    const Point& point() const { return point_; }
    const CMatrix& exponential(std::size_t b) const { return blocks_.at(b).e; }

    /// Matrix P with d^alpha E = P E.
    CMatrix exp_factor(std::size_t b, const MultiIndex& alpha) const {
        const auto vars = alpha.variables();
        const auto& cache = blocks_.at(b);
        const auto dim = cache.e.rows();
        for (auto v : vars)
            if (v >= family_->num_vars()) throw std::out_of_range("derivative variable out of range");
        switch (vars.size()) {
        case 0: return identity(dim);
        case 1: return cache.m_d[vars[0]];
        case 2:
            return family_->blocks()[b].recipe.generator_second_derivative(vars[0], vars[1]) +
                   cache.m_d[vars[0]] * cache.m_d[vars[1]];
        default: throw UnsupportedDerivative("derivatives above order 2 are not supported");
        }
    }

    CMatrix exp_derivative(std::size_t b, const MultiIndex& alpha) const {
        return exp_factor(b, alpha) * blocks_.at(b).e;
    }

    CMatrix pi_block(std::size_t b, const MultiIndex& alpha = {}) const {
        const auto& blk = family_->blocks().at(b);
        return blk.c * exp_derivative(b, alpha) * blk.chat;
    }

    CMatrix pi(const MultiIndex& alpha = {}) const {
        std::vector<CMatrix> parts;
        for (std::size_t b = 0; b < blocks_.size(); ++b) parts.push_back(pi_block(b, alpha));
        return hcat(parts);
    }

    /// S and its derivatives; order >= 1 goes through the family's rules when
    /// the variable has one, otherwise through direct differentiation.
    CMatrix s(const MultiIndex& alpha = {}) const {
        const auto vars = alpha.variables();
        if (vars.empty()) return s_direct(alpha);
        if (vars.size() > 2) throw UnsupportedDerivative("derivatives above order 2 are not supported");
        const auto& rule = family_->rules().at(vars[0]);
        if (rule.empty()) return s_direct(alpha);
        const auto n = family_->rows();
        CMatrix out = CMatrix::Zero(n, n);
        for (const auto& term : rule) {
            if (vars.size() == 1) {
                out += term.coefficient * rule_product(term, term.left, term.right);
            } else {
                out += term.coefficient * (rule_product(term, term.left.plus(vars[1]), term.right) +
                                           rule_product(term, term.left, term.right.plus(vars[1])));
            }
        }
        return out;
    }

    /// Differentiates sign * C E R E^* C^* term by term; uses no identity.
    CMatrix s_direct(const MultiIndex& alpha = {}) const {
        const auto vars = alpha.variables();
        if (vars.size() > 2) throw UnsupportedDerivative("derivatives above order 2 are not supported");
        const auto n = family_->rows();
        CMatrix out = vars.empty() ? CMatrix(family_->s0()) : CMatrix(CMatrix::Zero(n, n));
        for (const auto& t : family_->s_terms()) {
            const auto& blk = family_->blocks()[t.block];
            const CMatrix& e = blocks_[t.block].e;
            const CMatrix g = e * t.r * e.adjoint();
            CMatrix d;
            if (vars.empty()) {
                d = g;
            } else if (vars.size() == 1) {
                const CMatrix pv = exp_factor(t.block, alpha);
                d = pv * g + g * pv.adjoint();
            } else {
                const CMatrix pv = exp_factor(t.block, MultiIndex::of(vars[0]));
                const CMatrix pw = exp_factor(t.block, MultiIndex::of(vars[1]));
                const CMatrix pvw = exp_factor(t.block, alpha);
                d = pvw * g + pv * g * pw.adjoint() + pw * g * pv.adjoint() + g * pvw.adjoint();
            }
            out += static_cast<double>(t.sign) * blk.c * d * blk.c.adjoint();
        }
        return out;
    }

private:
    struct BlockCache {
        CMatrix e;
        std::vector<CMatrix> m_d;
    };

    CMatrix rule_product(const RuleTerm& term, const MultiIndex& left, const MultiIndex& right) const {
        const CMatrix l = pi_block(term.block, left);
        const CMatrix r = pi_block(term.block, right);
        if (term.nu.size() == 0) return l * r.adjoint();
        return l * term.nu * r.adjoint();
    }

    const PseudoExpFamily* family_;
    Point point_;
    std::vector<BlockCache> blocks_;
};

/// Adds S^{-1} and derivatives of W = Pi^* S^{-1} and Q = Pi^* S^{-1} Pi.
/// Singular points (pivot below threshold) are flagged, never thrown.
class InversePoint {
public:
    InversePoint(const PseudoExpFamily& family, const Point& p) : fp_(family, p) {
        if (!family.has_s()) throw std::invalid_argument("InversePoint: family has no S");
        s_ = fp_.s();
        CheckedSolver solver(s_);
        singular_ = solver.singular();
        if (!singular_) y_ = solver.inverse();
        for (std::size_t v = 0; v < family.num_vars(); ++v) s_d_.push_back(fp_.s(MultiIndex::of(v)));
    }

    bool singular() const noexcept { return singular_; }
    const FamilyPoint& family_point() const { return fp_; }
    const CMatrix& s() const { return s_; }
    const CMatrix& s_inverse() const {
        require_regular();
        return y_;
    }

    CMatrix s_inverse_derivative(const MultiIndex& alpha) const {
        require_regular();
        const auto vars = alpha.variables();
        switch (vars.size()) {
        case 0: return y_;
        case 1: return -y_ * s_d_[vars[0]] * y_;
        case 2: {
            const CMatrix& sv = s_d_[vars[0]];
            const CMatrix& sw = s_d_[vars[1]];
            return y_ * sw * y_ * sv * y_ + y_ * sv * y_ * sw * y_ - y_ * fp_.s(alpha) * y_;
        }
        default: throw UnsupportedDerivative("derivatives above order 2 are not supported");
        }
    }

    /// d^alpha (Pi^* S^{-1})
    CMatrix w(const MultiIndex& alpha = {}) const {
        require_regular();
        const auto vars = alpha.variables();
        auto pi_adj = [&](const MultiIndex& a) { return CMatrix(fp_.pi(a).adjoint()); };
        switch (vars.size()) {
        case 0: return pi_adj({}) * y_;
        case 1: return pi_adj(alpha) * y_ + pi_adj({}) * s_inverse_derivative(alpha);
        case 2: {
            const auto v = MultiIndex::of(vars[0]);
            const auto w = MultiIndex::of(vars[1]);
            return pi_adj(alpha) * y_ + pi_adj(v) * s_inverse_derivative(w) + pi_adj(w) * s_inverse_derivative(v) +
                   pi_adj({}) * s_inverse_derivative(alpha);
        }
        default: throw UnsupportedDerivative("derivatives above order 2 are not supported");
        }
    }

    /// d^alpha (Pi^* S^{-1} Pi)
    CMatrix q(const MultiIndex& alpha = {}) const {
        const auto vars = alpha.variables();
        switch (vars.size()) {
        case 0: return w() * fp_.pi();
        case 1: return w(alpha) * fp_.pi() + w() * fp_.pi(alpha);
        case 2: {
            const auto v = MultiIndex::of(vars[0]);
            const auto w1 = MultiIndex::of(vars[1]);
            return w(alpha) * fp_.pi() + w(v) * fp_.pi(w1) + w(w1) * fp_.pi(v) + w() * fp_.pi(alpha);
        }
        default: throw UnsupportedDerivative("derivatives above order 2 are not supported");
        }
    }

private:
    void require_regular() const {
        if (singular_) throw std::logic_error("S is singular at this point");
    }

    FamilyPoint fp_;
    CMatrix s_;
    CMatrix y_;
    std::vector<CMatrix> s_d_;
    bool singular_ = false;
};

// ---------------------------------------------------------------------------
// Free-function surface

inline void check_order(const MultiIndex& alpha) {
    if (alpha.order() > 2) throw UnsupportedDerivative("derivatives above order 2 are not supported");
}

inline CMatrix eval_pi(const PseudoExpFamily& family, const Point& p, const MultiIndex& alpha = {}) {
    check_order(alpha);
    return FamilyPoint(family, p).pi(alpha);
}

inline CMatrix eval_s(const PseudoExpFamily& family, const Point& p, const MultiIndex& alpha = {}) {
    check_order(alpha);
    return FamilyPoint(family, p).s(alpha);
}

inline CMatrix eval_s_direct(const PseudoExpFamily& family, const Point& p, const MultiIndex& alpha = {}) {
    check_order(alpha);
    return FamilyPoint(family, p).s_direct(alpha);
}

inline std::optional<CMatrix> eval_q(const PseudoExpFamily& family, const Point& p) {
    InversePoint ip(family, p);
    if (ip.singular()) return std::nullopt;
    return ip.q();
}

inline std::optional<CMatrix> eval_w(const PseudoExpFamily& family, const Point& p) {
    InversePoint ip(family, p);
    if (ip.singular()) return std::nullopt;
    return ip.w();
}

inline std::optional<CMatrix> eval_q_deriv(const PseudoExpFamily& family, const Point& p, std::size_t var, int order) {
    if (order < 1 || order > 2) throw UnsupportedDerivative("eval_q_deriv: order must be 1 or 2");
    InversePoint ip(family, p);
    if (ip.singular()) return std::nullopt;
    MultiIndex alpha = MultiIndex::of(var);
    if (order == 2) alpha = alpha.plus(var);
    return ip.q(alpha);
}

/// Largest |rule-based dS - direct dS| / (1 + |direct dS|) over all first and
/// second partials at p.
inline double rule_consistency(const PseudoExpFamily& family, const Point& p) {
    FamilyPoint fp(family, p);
    double worst = 0.0;
    for (std::size_t v = 0; v < family.num_vars(); ++v) {
        std::vector<MultiIndex> alphas{MultiIndex::of(v)};
        for (std::size_t w = v; w < family.num_vars(); ++w) alphas.push_back(MultiIndex::of(v, w));
        for (const auto& a : alphas) {
            const CMatrix direct = fp.s_direct(a);
            worst = std::max(worst, (fp.s(a) - direct).norm() / (1.0 + direct.norm()));
        }
    }
    return worst;
}

}  // namespace pexp
