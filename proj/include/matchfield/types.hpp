#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace matchfield {

/// Partner coordinate of an unmatched agent (the "J" marker).
inline constexpr int kUnmatched = -1;

/// Types are 0-based internally; files and CSV output use 1-based labels.
struct ExtendedType {
    int own = 0;
    int partner = kUnmatched;

    bool matched() const { return partner != kUnmatched; }
    friend bool operator==(const ExtendedType &, const ExtendedType &) = default;
};

/// The type set S = {0..K-1} together with the canonical ordering of
/// S x (S u {J}): all matched cells (k,l) row-major, then (k,J) for each k.
class TypeSpace {
public:
    explicit TypeSpace(int types);

    int types() const { return types_; }
    std::size_t extended_size() const
    {
        return static_cast<std::size_t>(types_) * static_cast<std::size_t>(types_ + 1);
    }

    std::size_t index(int own, int partner) const
    {
        if (partner == kUnmatched)
            return static_cast<std::size_t>(types_) * types_ + own;
        return static_cast<std::size_t>(own) * types_ + partner;
    }
    std::size_t index(ExtendedType e) const { return index(e.own, e.partner); }
    ExtendedType at(std::size_t idx) const;

    friend bool operator==(const TypeSpace &, const TypeSpace &) = default;

private:
    int types_;
};

/// Sub-step of a period at which a distribution is observed:
/// post-mutation, post-matching, end of period.
enum class Stage { check, ccheck, hat };

std::string to_string(Stage stage);

struct Tolerances {
    double algebraic = 1e-12;
    double drift = 1e-9;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    void add(std::string msg) { violations.push_back(std::move(msg)); }
    std::string summary() const;
};

/// Probability mass on the extended type space. Entries are stored raw;
/// validity is checked by validate_distribution, never enforced silently.
class Distribution {
public:
    Distribution() : space_(1), mass_(2, 0.0) {}
    explicit Distribution(int types);
    Distribution(int types, std::vector<double> mass);

    int types() const { return space_.types(); }
    const TypeSpace &space() const { return space_; }
    std::size_t size() const { return mass_.size(); }

    double &operator[](std::size_t idx) { return mass_[idx]; }
    double operator[](std::size_t idx) const { return mass_[idx]; }

    double &matched(int k, int l) { return mass_[space_.index(k, l)]; }
    double matched(int k, int l) const { return mass_[space_.index(k, l)]; }
    double &unmatched(int k) { return mass_[space_.index(k, kUnmatched)]; }
    double unmatched(int k) const { return mass_[space_.index(k, kUnmatched)]; }

    std::span<const double> entries() const { return mass_; }
    std::span<double> entries() { return mass_; }

    double total() const;

    /// All mass at (k,J).
    static Distribution point_unmatched(int types, int k);

    friend bool operator==(const Distribution &, const Distribution &) = default;

private:
    TypeSpace space_;
    std::vector<double> mass_;
};

ValidationReport validate_distribution(const Distribution &p, double tol = 1e-12);

/// One period's realized intensities. Flat row-major storage:
///   eta[k1][k2], theta[k][l], b[k], xi[k][l],
///   sigma[k][l][k2][l2], varsigma[k][l][k2].
class InputMatrices {
public:
    InputMatrices() : InputMatrices(1) {}
    explicit InputMatrices(int types);

    /// eta = I, theta = 0, xi = 0, sigma keeps types, varsigma keeps own type.
    static InputMatrices identity(int types);

    int types() const { return types_; }

    double &eta(int from, int to) { return eta_[ix2(from, to)]; }
    double eta(int from, int to) const { return eta_[ix2(from, to)]; }
    double &theta(int k, int l) { return theta_[ix2(k, l)]; }
    double theta(int k, int l) const { return theta_[ix2(k, l)]; }
    double b(int k) const { return b_[k]; }
    double &xi(int k, int l) { return xi_[ix2(k, l)]; }
    double xi(int k, int l) const { return xi_[ix2(k, l)]; }
    double &sigma(int k, int l, int k2, int l2) { return sigma_[ix4(k, l, k2, l2)]; }
    double sigma(int k, int l, int k2, int l2) const { return sigma_[ix4(k, l, k2, l2)]; }
    double &varsigma(int k, int l, int k2) { return varsigma_[ix3(k, l, k2)]; }
    double varsigma(int k, int l, int k2) const { return varsigma_[ix3(k, l, k2)]; }

    std::span<const double> eta_row(int from) const
    {
        return std::span<const double>(eta_).subspan(ix2(from, 0), types_);
    }
    std::span<const double> theta_row(int k) const
    {
        return std::span<const double>(theta_).subspan(ix2(k, 0), types_);
    }
    /// Joint law of the new (k2,l2) for a persisting (k,l) pair, K*K entries.
    std::span<const double> sigma_block(int k, int l) const
    {
        return std::span<const double>(sigma_).subspan(ix4(k, l, 0, 0), types_ * types_);
    }
    std::span<const double> varsigma_row(int k, int l) const
    {
        return std::span<const double>(varsigma_).subspan(ix3(k, l, 0), types_);
    }

    /// b[k] = 1 - sum_l theta[k][l]. Call after editing theta.
    void recompute_b();

    /// Copy the matching part (theta, b) from another table.
    void take_matching(const InputMatrices &from);
    /// Copy the break-up part (xi, sigma, varsigma) from another table.
    void take_breakup(const InputMatrices &from);

    friend bool operator==(const InputMatrices &, const InputMatrices &) = default;

private:
    std::size_t ix2(int a, int b) const { return static_cast<std::size_t>(a) * types_ + b; }
    std::size_t ix3(int a, int b, int c) const { return ix2(a, b) * types_ + c; }
    std::size_t ix4(int a, int b, int c, int d) const { return ix3(a, b, c) * types_ + d; }

    int types_;
    std::vector<double> eta_, theta_, b_, xi_, sigma_, varsigma_;
};

ValidationReport validate_inputs(const InputMatrices &m, double tol = 1e-12);

/// Throws InvalidInputs carrying the report summary when the report is not ok.
void require_valid(const ValidationReport &report, const std::string &what);

/// 1-based label for CSV/file output: "1".."K" or "J".
std::string partner_label(int partner);

} // namespace matchfield
