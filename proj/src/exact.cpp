#include "symflow/exact.hpp"

#include <sstream>

namespace symflow {

std::optional<ExactReal> ExactReal::try_mul(const ExactReal& o) const {
    if (is_rational()) return o.scaled(c_[kOne]);
    if (o.is_rational()) return scaled(o.c_[kOne]);
    // sqrt_k * sqrt_k = k; pi*anything irrational and mixed radicals are out.
    auto single = [](const ExactReal& e) -> int {
        int sym = -1;
        for (int i = 1; i < kDim; ++i) {
            if (e.c_[i] != 0) {
                if (sym != -1) return -2;
                sym = i;
            }
        }
        return sym;  // -1 never happens here (not rational)
    };
    int sa = single(*this), sb = single(o);
    if (sa < 0 || sb < 0 || sa != sb || sa == kPi) return std::nullopt;
    if (c_[kOne] != 0 || o.c_[kOne] != 0) {
        // (p + q s)(r + t s) = pr + qt s^2 + (pt + qr) s
        if (sa == kPi) return std::nullopt;
        long k = (sa == kSqrt2) ? 2 : (sa == kSqrt3) ? 3 : 5;
        ExactReal r;
        r.c_[kOne] = c_[kOne] * o.c_[kOne] + c_[sa] * o.c_[sa] * k;
        r.c_[sa] = c_[kOne] * o.c_[sa] + c_[sa] * o.c_[kOne];
        return r;
    }
    long k = (sa == kSqrt2) ? 2 : (sa == kSqrt3) ? 3 : 5;
    ExactReal r;
    r.c_[kOne] = c_[sa] * o.c_[sa] * k;
    return r;
}

std::string ExactReal::str() const {
    static const char* names[kDim] = {"", "sqrt2", "sqrt3", "sqrt5", "pi"};
    std::ostringstream os;
    bool first = true;
    for (int i = 0; i < kDim; ++i) {
        if (c_[i] == 0) continue;
        Rat q = c_[i];
        if (!first) os << (q < 0 ? " - " : " + ");
        else if (q < 0) os << "-";
        Rat aq = abs(q);
        if (i == 0) {
            os << aq.get_str();
        } else {
            if (aq != 1) os << aq.get_str() << "*";
            os << names[i];
        }
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

ExactReal ExactReal::parse(const std::string& token) {
    std::string s;
    for (char ch : token)
        if (!isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) throw InvalidInput("ExactReal::parse: empty token");

    bool neg = false;
    if (s[0] == '-') { neg = true; s = s.substr(1); }
    else if (s[0] == '+') { s = s.substr(1); }

    Rat coeff(1);
    std::string symname = s;
    auto star = s.find('*');
    if (star != std::string::npos) {
        coeff = Rat(s.substr(0, star));
        coeff.canonicalize();
        symname = s.substr(star + 1);
    }
    Symbol sym = kOne;
    if (symname == "pi") sym = kPi;
    else if (symname == "sqrt2") sym = kSqrt2;
    else if (symname == "sqrt3") sym = kSqrt3;
    else if (symname == "sqrt5") sym = kSqrt5;
    else if (symname == "phi" || symname == "golden") {
        ExactReal g = golden_ratio().scaled(coeff);
        return neg ? -g : g;
    } else {
        // plain rational or decimal
        if (symname.find('.') != std::string::npos) {
            // decimal -> exact rational
            auto dotpos = symname.find('.');
            std::string ip = symname.substr(0, dotpos);
            std::string fp = symname.substr(dotpos + 1);
            Rat den(1);
            for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
            Rat v = Rat(ip.empty() ? "0" : ip) + Rat(fp.empty() ? "0" : fp) / den;
            v.canonicalize();
            if (star != std::string::npos)
                throw InvalidInput("ExactReal::parse: bad token " + token);
            ExactReal e(v);
            return neg ? -e : e;
        }
        Rat v(symname);
        v.canonicalize();
        ExactReal e(coeff * v);
        return neg ? -e : e;
    }
    ExactReal e = symbol(sym, coeff);
    return neg ? -e : e;
}

}  // namespace symflow
