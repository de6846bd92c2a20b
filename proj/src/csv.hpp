#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gae::detail {

std::string_view trim(std::string_view s);

/// Splits one csv line. Fields are trimmed; a field may be wrapped in double
/// quotes, with "" standing for a literal quote. Throws DataError naming
/// `line` on malformed quoting.
std::vector<std::string> split_csv(std::string_view text, std::size_t line);

}  // namespace gae::detail
