#include <unordered_map>

#include "rapm/errors.hpp"
#include "rapm/glm.hpp"

namespace rapm {

nlohmann::json fit_to_json(const FitResult& fit, const DesignMatrix& x)
{
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
        if (fit.coefficients[j] != 0.0)
            coefs.push_back({{"column", j}, {"name", x.column(j).name}, {"value", fit.coefficients[j]}});
    nlohmann::json out = {
        {"family", to_string(fit.family)},
        {"alpha", fit.alpha},
        {"lambda", fit.lambda},
        {"intercept", fit.intercept},
        {"coefficients", std::move(coefs)},
        {"n_nonzero", fit.n_nonzero},
        {"converged", fit.converged},
        {"objective", fit.objective},
    };
    if (fit.separation)
        out["separation"] = true;
    return out;
}

FitResult fit_from_json(const nlohmann::json& j, const DesignMatrix& x,
                        std::vector<std::string>* unmatched)
{
    try {
        FitResult fit;
        fit.family = family_from_string(j.at("family").get<std::string>());
        fit.alpha = j.at("alpha").get<double>();
        fit.lambda = j.at("lambda").get<double>();
        fit.intercept = j.at("intercept").get<double>();
        fit.converged = j.value("converged", true);
        fit.objective = j.value("objective", 0.0);
        fit.coefficients.assign(x.cols(), 0.0);
        std::unordered_map<std::string, std::size_t> by_name;
        for (std::size_t c = 0; c < x.cols(); ++c)
            by_name.emplace(x.column(c).name, c);
        for (const auto& e : j.at("coefficients")) {
            const auto name = e.at("name").get<std::string>();
            auto it = by_name.find(name);
            if (it == by_name.end()) {
                if (unmatched)
                    unmatched->push_back(name);
                continue;
            }
            fit.coefficients[it->second] = e.at("value").get<double>();
        }
        for (std::size_t c = 0; c < x.cols(); ++c)
            if (x.column(c).penalized && fit.coefficients[c] != 0.0)
                ++fit.n_nonzero;
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed fit JSON: ") + e.what());
    }
}

} // namespace rapm
