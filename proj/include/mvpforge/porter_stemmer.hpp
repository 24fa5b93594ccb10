#pragma once

#include <string>
#include <string_view>

namespace mvpforge {

// Classic Porter (1980) suffix stripper, following the reference C
// implementation including its two documented departures (-bli, -logi).
// Words containing anything other than a-z are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace mvpforge
