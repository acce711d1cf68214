#pragma once

#include "bodies.hpp"

#include <string_view>

namespace symcap {

// Parses the body description grammar:
//   ball(n) | cube(n) | ellipsoid(a1,...) | polydisk(r1,...) | superellipse(p,r)
//   ballproduct(rho=[...], I=[[...],...], J=[[...],...])
//   sum(K1, K2, ...) | scale(c, K) | linimg([[...],...], K)
// Whitespace is insignificant. Throws ParseError with the offending token.
SupportBody parse_body(std::string_view text);

}  // namespace symcap
