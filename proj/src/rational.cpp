#include "psp/rational.hpp"

#include <cctype>

namespace psp {

std::optional<Rational> Rational::parse(const std::string& text) {
  if (text.empty()) return std::nullopt;
  size_t start = 0;
  bool neg = false;
  if (text[0] == '+' || text[0] == '-') {
    neg = text[0] == '-';
    start = 1;
  }
  auto digits = [&](size_t from, size_t to) {
    if (from >= to) return false;
    for (size_t i = from; i < to; ++i)
      if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    return true;
  };
  size_t slash = text.find('/', start);
  size_t dot = text.find('.', start);
  try {
    if (slash != std::string::npos) {
      if (!digits(start, slash) || !digits(slash + 1, text.size()))
        return std::nullopt;
      mpq_class v(text.substr(start), 10);
      if (v.get_den() == 0) return std::nullopt;
      v.canonicalize();
      return Rational(neg ? mpq_class(-v) : v);
    }
    if (dot != std::string::npos) {
      if (!digits(start, dot) || !digits(dot + 1, text.size()))
        return std::nullopt;
      std::string frac = text.substr(dot + 1);
      mpz_class num(text.substr(start, dot - start) + frac, 10);
      mpz_class den;
      mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
      mpq_class v(num, den);
      v.canonicalize();
      return Rational(neg ? mpq_class(-v) : v);
    }
    if (!digits(start, text.size())) return std::nullopt;
    mpq_class v(text.substr(start), 10);
    return Rational(neg ? mpq_class(-v) : v);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

std::string Rational::str() const {
  return v_.get_str();
}

}  // namespace psp
