#include "rca/templates.hpp"

#include "rca/error.hpp"

#include <cctype>

namespace rca {
namespace detail {
const std::map<std::string, std::string>& template_assets();
}

namespace templates {

const std::string& get(std::string_view name) {
    const auto& assets = detail::template_assets();
    auto it = assets.find(std::string(name));
    if (it == assets.end()) throw Error(ErrorKind::not_found, "no template named " + std::string(name));
    return it->second;
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && (std::islower(static_cast<unsigned char>(tmpl[j])) ||
                                       std::isdigit(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_')) {
                ++j;
            }
            if (j < tmpl.size() && tmpl[j] == '}' && j > i + 1) {
                const std::string key(tmpl.substr(i + 1, j - i - 1));
                auto it = values.find(key);
                if (it == values.end()) {
                    throw Error(ErrorKind::validation, "template placeholder {" + key + "} has no value");
                }
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out.push_back(tmpl[i]);
        ++i;
    }
    return out;
}

}  // namespace templates
}  // namespace rca
