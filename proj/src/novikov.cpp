#include "symflow/novikov.hpp"

#include <algorithm>
#include <sstream>

namespace symflow {

NovikovSeries NovikovSeries::monomial(const Rat& c, const ExactReal& e,
                                      double floor) {
    NovikovSeries s(floor);
    s.add_term(e, c);
    return s;
}

const NovikovSeries::Term& NovikovSeries::leading() const {
    if (terms_.empty()) throw ZeroDivision("leading term of the zero series");
    return terms_.front();
}

void NovikovSeries::add_term(const ExactReal& e, const Rat& c) {
    if (c == 0) return;
    if (e.witness() < static_cast<long double>(floor_)) return;
    auto it = std::lower_bound(
        terms_.begin(), terms_.end(), e,
        [](const Term& t, const ExactReal& x) { return x < t.exponent; });
    if (it != terms_.end() && it->exponent == e) {
        it->coeff += c;
        if (it->coeff == 0) terms_.erase(it);
    } else {
        terms_.insert(it, Term{e, c});
    }
}

NovikovSeries NovikovSeries::operator+(const NovikovSeries& o) const {
    NovikovSeries r(std::max(floor_, o.floor_));
    r.terms_ = terms_;
    for (const auto& t : o.terms_) r.add_term(t.exponent, t.coeff);
    // re-apply the (possibly raised) floor
    if (o.floor_ > floor_) {
        NovikovSeries s(r.floor_);
        for (const auto& t : r.terms_) s.add_term(t.exponent, t.coeff);
        return s;
    }
    return r;
}

NovikovSeries NovikovSeries::operator-() const {
    NovikovSeries r(floor_);
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

NovikovSeries NovikovSeries::operator-(const NovikovSeries& o) const {
    return *this + (-o);
}

NovikovSeries NovikovSeries::operator*(const NovikovSeries& o) const {
    NovikovSeries r(std::max(floor_, o.floor_));
    for (const auto& s : terms_)
        for (const auto& t : o.terms_)
            r.add_term(s.exponent + t.exponent, s.coeff * t.coeff);
    return r;
}

NovikovSeries NovikovSeries::with_floor(double floor) const {
    NovikovSeries r(floor);
    for (const auto& t : terms_) r.add_term(t.exponent, t.coeff);
    return r;
}

NovikovSeries NovikovSeries::inverse() const {
    if (terms_.empty()) throw ZeroDivision("inverting the zero Novikov series");
    const Term& lead = terms_.front();
    if ((-lead.exponent).witness() < static_cast<long double>(floor_))
        throw FloorExhausted("inverse has no terms above the floor");
    // a = c0 t^{e0} (1 + u) with val(u) < 0; 1/a = c0^{-1} t^{-e0} sum (-u)^k
    NovikovSeries u(floor_);
    Rat inv_c0 = Rat(1) / lead.coeff;
    for (std::size_t i = 1; i < terms_.size(); ++i)
        u.add_term(terms_[i].exponent - lead.exponent, terms_[i].coeff * inv_c0);

    NovikovSeries acc = one(floor_);    // running (-u)^k
    NovikovSeries sum = one(floor_);
    // each power of u drops the top exponent by at least this gap
    double gap = u.is_zero()
                     ? 1.0
                     : -static_cast<double>(u.leading().exponent.witness());
    if (!u.is_zero() && gap <= 0)
        throw FloorExhausted("inverse: non-decreasing exponents");
    int max_pow = u.is_zero() ? 0
                              : static_cast<int>((0.0 - floor_) / gap) + 2;
    for (int k = 1; k <= max_pow; ++k) {
        acc = acc * (-u);
        if (acc.is_zero()) break;
        sum = sum + acc;
    }
    NovikovSeries r(floor_);
    for (const auto& t : sum.terms_)
        r.add_term(t.exponent - lead.exponent, t.coeff * inv_c0);
    return r;
}

std::string NovikovSeries::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        Rat c = t.coeff;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        Rat ac = abs(c);
        bool exp_zero = t.exponent.is_zero();
        if (ac != 1 || exp_zero) os << ac.get_str();
        if (!exp_zero) {
            if (ac != 1) os << "*";
            os << "t^{" << t.exponent.str() << "}";
        }
        first = false;
    }
    return os.str();
}

void PeriodVector::validate() const {
    if (genus < 1) throw InvalidInput("PeriodVector: genus must be >= 1");
    if (periods.size() != static_cast<std::size_t>(2 * genus))
        throw InvalidInput("PeriodVector: need 2g periods");
}

bool PeriodVector::is_zero() const {
    for (const auto& p : periods)
        if (!p.is_zero()) return false;
    return true;
}

double PeriodVector::max_abs() const {
    double m = 0;
    for (const auto& p : periods)
        m = std::max(m, std::abs(static_cast<double>(p.witness())));
    return m;
}

PeriodVector PeriodVector::scaled(const ExactReal& c) const {
    PeriodVector r;
    r.genus = genus;
    for (const auto& p : periods) {
        auto prod = p.try_mul(c);
        if (!prod)
            throw InvalidInput("PeriodVector::scaled: product leaves the exact set");
        r.periods.push_back(*prod);
    }
    return r;
}

NovikovMatrix NovikovMatrix::operator*(const NovikovMatrix& o) const {
    if (cols != o.rows) throw InvalidInput("NovikovMatrix: shape mismatch");
    double floor = entries.empty() ? -1e9 : entries.front().floor_cutoff();
    NovikovMatrix r(rows, o.cols, floor);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < o.cols; ++j) {
            NovikovSeries acc(floor);
            for (int k = 0; k < cols; ++k) acc = acc + at(i, k) * o.at(k, j);
            r.at(i, j) = acc;
        }
    return r;
}

int NovikovMatrix::rank() const {
    NovikovMatrix m = *this;
    std::vector<bool> row_used(static_cast<std::size_t>(m.rows), false);
    std::vector<bool> col_used(static_cast<std::size_t>(m.cols), false);
    int rank = 0;
    const double floor = entries.empty() ? -1e9 : entries.front().floor_cutoff();
    const double margin = 0.05 * std::abs(floor);
    for (;;) {
        // valuation-greedy pivot: greatest leading exponent
        int pr = -1, pc = -1;
        long double best = -1e30L;
        for (int i = 0; i < m.rows; ++i) {
            if (row_used[i]) continue;
            for (int j = 0; j < m.cols; ++j) {
                if (col_used[j]) continue;
                const NovikovSeries& e = m.at(i, j);
                if (e.is_zero()) continue;
                long double v = e.leading().exponent.witness();
                if (v > best) {
                    best = v;
                    pr = i;
                    pc = j;
                }
            }
        }
        if (pr < 0) break;
        if (static_cast<double>(best) < floor + margin)
            throw FloorExhausted("pivot leading exponent too close to the floor");
        row_used[pr] = true;
        col_used[pc] = true;
        ++rank;
        NovikovSeries pivot_inv = m.at(pr, pc).inverse();
        for (int i = 0; i < m.rows; ++i) {
            if (row_used[i] || m.at(i, pc).is_zero()) continue;
            NovikovSeries factor = m.at(i, pc) * pivot_inv;
            for (int j = 0; j < m.cols; ++j) {
                if (col_used[j]) continue;
                m.at(i, j) = m.at(i, j) - factor * m.at(pr, j);
            }
            m.at(i, pc) = NovikovSeries(floor);
        }
    }
    return rank;
}

CellularComplex cellular_complex(const PeriodVector& w, double floor) {
    w.validate();
    int g = w.genus;
    CellularComplex c;
    c.d1 = NovikovMatrix(1, 2 * g, floor);
    c.d2 = NovikovMatrix(2 * g, 1, floor);
    ExactReal zero;
    for (int i = 0; i < g; ++i) {
        const ExactReal& alpha = w.periods[static_cast<std::size_t>(2 * i)];
        const ExactReal& beta = w.periods[static_cast<std::size_t>(2 * i + 1)];
        // d1 on the 1-cells a_i, b_i: t^alpha - 1, t^beta - 1
        NovikovSeries da(floor), db(floor);
        da.add_term(alpha, Rat(1));
        da.add_term(zero, Rat(-1));
        db.add_term(beta, Rat(1));
        db.add_term(zero, Rat(-1));
        c.d1.at(0, 2 * i) = da;
        c.d1.at(0, 2 * i + 1) = db;
        // abelianized Fox derivatives of prod [a_i, b_i]:
        // d/d a_i -> 1 - t^{beta_i},  d/d b_i -> t^{alpha_i} - 1
        NovikovSeries fa(floor), fb(floor);
        fa.add_term(zero, Rat(1));
        fa.add_term(beta, Rat(-1));
        fb.add_term(alpha, Rat(1));
        fb.add_term(zero, Rat(-1));
        c.d2.at(2 * i, 0) = fa;
        c.d2.at(2 * i + 1, 0) = fb;
    }
    return c;
}

double default_floor(const PeriodVector& w) { return -50.0 * (w.max_abs() + 1.0); }

HomologyRanks novikov_ranks(const PeriodVector& w, std::optional<double> floor_opt) {
    w.validate();
    double floor = floor_opt.value_or(default_floor(w));
    int g = w.genus;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            CellularComplex c = cellular_complex(w, floor);
            int r1 = c.d1.rank();
            int r2 = c.d2.rank();
            HomologyRanks h;
            h.ranks = {1 - r1, 2 * g - r1 - r2, 1 - r2};
            h.euler = h.ranks[0] - h.ranks[1] + h.ranks[2];
            return h;
        } catch (const FloorExhausted&) {
            if (attempt == 3) throw;
            floor *= 2.0;
        }
    }
    throw FloorExhausted("novikov_ranks: retries exhausted");
}

int euler_number(const PeriodVector& w) {
    HomologyRanks h = novikov_ranks(w);
    return h.euler;
}

}  // namespace symflow
