#include "matchfield/types.hpp"

#include "matchfield/errors.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <sstream>

namespace matchfield {

TypeSpace::TypeSpace(int types) : types_(types)
{
    if (types < 1)
        throw InvalidInputs("type count must be at least 1");
}

ExtendedType TypeSpace::at(std::size_t idx) const
{
    const auto matched_cells = static_cast<std::size_t>(types_) * types_;
    if (idx < matched_cells)
        return {static_cast<int>(idx / types_), static_cast<int>(idx % types_)};
    return {static_cast<int>(idx - matched_cells), kUnmatched};
}

std::string ValidationReport::summary() const
{
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i)
            out << "; ";
        out << violations[i];
    }
    return out.str();
}

Distribution::Distribution(int types) : space_(types), mass_(space_.extended_size(), 0.0) {}

Distribution::Distribution(int types, std::vector<double> mass)
    : space_(types), mass_(std::move(mass))
{
    if (mass_.size() != space_.extended_size())
        throw InvalidInputs("distribution has " + std::to_string(mass_.size()) + " entries, expected "
                            + std::to_string(space_.extended_size()));
}

double Distribution::total() const
{
    return std::accumulate(mass_.begin(), mass_.end(), 0.0);
}

Distribution Distribution::point_unmatched(int types, int k)
{
    Distribution p(types);
    p.unmatched(k) = 1.0;
    return p;
}

static std::string cell_name(int k, int l)
{
    return "(" + std::to_string(k + 1) + "," + partner_label(l) + ")";
}

ValidationReport validate_distribution(const Distribution &p, double tol)
{
    ValidationReport report;
    const int K = p.types();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto e = p.space().at(i);
        if (!std::isfinite(p[i]))
            report.add("non-finite mass at " + cell_name(e.own, e.partner));
        else if (p[i] < 0.0)
            report.add(fmt::format("negative mass {} at {}", p[i], cell_name(e.own, e.partner)));
    }
    const double total = p.total();
    if (!(std::abs(total - 1.0) <= tol))
        report.add(fmt::format("total mass {:.17g} differs from 1", total));
    for (int k = 0; k < K; ++k)
        for (int l = k + 1; l < K; ++l)
            if (!(std::abs(p.matched(k, l) - p.matched(l, k)) <= tol))
                report.add(fmt::format("asymmetric mass {} at {} vs {} at {}", p.matched(k, l),
                                       cell_name(k, l), p.matched(l, k), cell_name(l, k)));
    return report;
}

InputMatrices::InputMatrices(int types)
    : types_(types)
{
    if (types < 1)
        throw InvalidInputs("type count must be at least 1");
    const std::size_t k = static_cast<std::size_t>(types);
    eta_.assign(k * k, 0.0);
    theta_.assign(k * k, 0.0);
    b_.assign(k, 1.0);
    xi_.assign(k * k, 0.0);
    sigma_.assign(k * k * k * k, 0.0);
    varsigma_.assign(k * k * k, 0.0);
}

InputMatrices InputMatrices::identity(int types)
{
    InputMatrices m(types);
    for (int k = 0; k < types; ++k) {
        m.eta(k, k) = 1.0;
        for (int l = 0; l < types; ++l) {
            m.sigma(k, l, k, l) = 1.0;
            m.varsigma(k, l, k) = 1.0;
        }
    }
    return m;
}

void InputMatrices::recompute_b()
{
    for (int k = 0; k < types_; ++k) {
        double s = 0.0;
        for (int l = 0; l < types_; ++l)
            s += theta(k, l);
        b_[k] = 1.0 - s;
    }
}

void InputMatrices::take_matching(const InputMatrices &from)
{
    theta_ = from.theta_;
    b_ = from.b_;
}

void InputMatrices::take_breakup(const InputMatrices &from)
{
    xi_ = from.xi_;
    sigma_ = from.sigma_;
    varsigma_ = from.varsigma_;
}

namespace {

bool in_unit(double x, double tol)
{
    return std::isfinite(x) && x >= -tol && x <= 1.0 + tol;
}

} // namespace

ValidationReport validate_inputs(const InputMatrices &m, double tol)
{
    ValidationReport report;
    const int K = m.types();
    for (int k = 0; k < K; ++k) {
        double row = 0.0;
        for (int j = 0; j < K; ++j) {
            if (!in_unit(m.eta(k, j), 0.0))
                report.add(fmt::format("eta[{}][{}] = {} outside [0,1]", k + 1, j + 1, m.eta(k, j)));
            row += m.eta(k, j);
        }
        if (!(std::abs(row - 1.0) <= tol))
            report.add(fmt::format("eta row {} sums to {:.17g}", k + 1, row));
    }
    for (int k = 0; k < K; ++k) {
        double row = 0.0;
        for (int l = 0; l < K; ++l) {
            if (!in_unit(m.theta(k, l), 0.0))
                report.add(fmt::format("theta[{}][{}] = {} outside [0,1]", k + 1, l + 1, m.theta(k, l)));
            row += m.theta(k, l);
        }
        if (!(row <= 1.0 + tol))
            report.add(fmt::format("theta row {} sums to {:.17g} > 1", k + 1, row));
        if (!(m.b(k) >= -tol))
            report.add(fmt::format("b[{}] = {:.17g} < 0", k + 1, m.b(k)));
        if (!(std::abs(m.b(k) - (1.0 - row)) <= tol))
            report.add(fmt::format("b[{}] = {:.17g} inconsistent with theta row", k + 1, m.b(k)));
    }
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            if (!in_unit(m.xi(k, l), 0.0))
                report.add(fmt::format("xi[{}][{}] = {} outside [0,1]", k + 1, l + 1, m.xi(k, l)));
            if (!(std::abs(m.xi(k, l) - m.xi(l, k)) <= tol))
                report.add(fmt::format("xi[{}][{}] != xi[{}][{}]", k + 1, l + 1, l + 1, k + 1));

            double sigma_total = 0.0;
            bool sigma_sym = true;
            for (int k2 = 0; k2 < K; ++k2)
                for (int l2 = 0; l2 < K; ++l2) {
                    const double s = m.sigma(k, l, k2, l2);
                    if (!in_unit(s, 0.0))
                        report.add(fmt::format("sigma[{}][{}][{}][{}] = {} outside [0,1]", k + 1, l + 1,
                                               k2 + 1, l2 + 1, s));
                    sigma_total += s;
                    if (!(std::abs(s - m.sigma(l, k, l2, k2)) <= tol))
                        sigma_sym = false;
                }
            if (!(std::abs(sigma_total - 1.0) <= tol))
                report.add(fmt::format("sigma[{}][{}] sums to {:.17g}", k + 1, l + 1, sigma_total));
            if (!sigma_sym)
                report.add(fmt::format("sigma[{}][{}] not mirror-symmetric with sigma[{}][{}]", k + 1,
                                       l + 1, l + 1, k + 1));

            double vs_total = 0.0;
            for (int k2 = 0; k2 < K; ++k2) {
                const double v = m.varsigma(k, l, k2);
                if (!in_unit(v, 0.0))
                    report.add(fmt::format("varsigma[{}][{}][{}] = {} outside [0,1]", k + 1, l + 1,
                                           k2 + 1, v));
                vs_total += v;
            }
            if (!(std::abs(vs_total - 1.0) <= tol))
                report.add(fmt::format("varsigma[{}][{}] sums to {:.17g}", k + 1, l + 1, vs_total));
        }
    }
    return report;
}

void require_valid(const ValidationReport &report, const std::string &what)
{
    if (!report.ok())
        throw InvalidInputs(what + ": " + report.summary());
}

std::string to_string(Stage stage)
{
    switch (stage) {
    case Stage::check: return "check";
    case Stage::ccheck: return "ccheck";
    case Stage::hat: return "hat";
    }
    return "?";
}

std::string partner_label(int partner)
{
    return partner == kUnmatched ? std::string("J") : std::to_string(partner + 1);
}

} // namespace matchfield
