#include <gammaphi/report.hpp>

#include <cmath>

namespace gammaphi {

nlohmann::json json_real(double x) {
    if (std::isnan(x)) return "NaN";
    if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
    return x;
}

nlohmann::json json_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json_real(v[i]));
    return arr;
}

std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace gammaphi
