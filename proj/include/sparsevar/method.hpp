#pragma once

#include <string>
#include <string_view>

namespace sparsevar {

/// Estimators compared by the experiment harness. The first two produce point
/// estimates only.
enum class Method {
    lasso,
    lasso_ols,
    ldpe,
    bt_ldpe,
    multi_bt_ldpe,
};

std::string_view to_string(Method method);
/// Accepts the to_string spellings plus "lasso+ols"; throws ConfigError otherwise.
Method parse_method(std::string_view text);

inline bool has_intervals(Method m) { return m != Method::lasso && m != Method::lasso_ols; }

}  // namespace sparsevar
