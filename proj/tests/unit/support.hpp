#pragma once

#include <random>

#include "qmkit/words.hpp"

namespace qmkit::test {

inline Word w(const char* text, const GroupModel& m) { return parse_word(text, m); }

// Uniform random word of the given length over S and S^-1 (not reduced).
inline Word random_word(std::mt19937_64& rng, const GroupModel& m, std::size_t len) {
  std::uniform_int_distribution<int> gen(0, m.rank() - 1);
  std::uniform_int_distribution<int> sign(0, 1);
  Word out;
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(Letter{static_cast<std::uint8_t>(gen(rng)),
                         static_cast<std::int8_t>(sign(rng) ? 1 : -1)});
  }
  return out;
}

}  // namespace qmkit::test
