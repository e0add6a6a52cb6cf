#pragma once

#include <charconv>
#include <string>

namespace dmfem {

// printf("%.17g") equivalent; enough digits for an exact double round trip.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

}  // namespace dmfem
