#pragma once

#include <map>
#include <string>
#include <string_view>

namespace rca::templates {

// Named text asset compiled in from core/assets (file stem = name).
const std::string& get(std::string_view name);

// Replaces each {identifier} in `tmpl` with its value. Values are inserted
// verbatim and never re-scanned. Braces not enclosing an identifier are left
// alone; an identifier without a value is an error.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

inline std::string fill(std::string_view name, const std::map<std::string, std::string>& values) {
    return render(get(name), values);
}

}  // namespace rca::templates
