#pragma once

// JSON and CSV formats: NetworkSpec, TrainReport, datasets, fit results.

#include "qperceptron/activation.hpp"
#include "qperceptron/dynamics.hpp"
#include "qperceptron/network.hpp"
#include "qperceptron/training.hpp"

#include <json.hpp>

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qperceptron {

inline constexpr const char* kUnitsComment = "# units: frequencies in Omega_f = 1, times in 1/Omega_f";

inline nlohmann::json network_to_json(const NetworkSpec& net)
{
    return {{"n_inputs", net.n_inputs}, {"layer_sizes", net.layer_sizes}, {"mask", net.mask},
            {"J", net.J},               {"b", net.b},                     {"activation", to_string(net.activation)}};
}

inline NetworkSpec network_from_json(const nlohmann::json& j)
{
    NetworkSpec net;
    try {
        net.n_inputs = j.at("n_inputs").get<std::size_t>();
        net.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
        net.mask = j.at("mask").get<std::vector<int>>();
        net.J = j.at("J").get<std::vector<double>>();
        net.b = j.at("b").get<std::vector<double>>();
        net.activation = activation_from_string(j.at("activation").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed network document: ") + e.what());
    }
    net.validate();
    return net;
}

inline nlohmann::json train_report_to_json(const TrainReport& rep)
{
    return {{"cost_trace", rep.cost_trace}, {"accuracy", rep.accuracy}, {"params", network_to_json(rep.final_params)}};
}

inline nlohmann::json fit_to_json(const StretchedExponentialFit& fit)
{
    return {{"c0", fit.c0}, {"c1", fit.c1}, {"c2", fit.c2}};
}

/// `x_bits,y`
inline void write_dataset_csv(std::ostream& out, const Dataset& data)
{
    const auto old_precision = out.precision(17);
    out << "x_bits,y\n";
    for (const auto& s : data.pairs) {
        out << s.x << ',' << s.y << '\n';
    }
    out.precision(old_precision);
}

/// Reads `x_bits,y` rows; lines starting with '#' are skipped.
inline Dataset read_dataset_csv(std::istream& in)
{
    Dataset d;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header) {
            if (line != "x_bits,y") {
                throw std::invalid_argument("dataset CSV must start with the header x_bits,y");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("dataset row without a comma: " + line);
        }
        Sample s;
        s.x = line.substr(0, comma);
        try {
            std::size_t used = 0;
            const std::string y = line.substr(comma + 1);
            s.y = std::stod(y, &used);
            if (used != y.size()) {
                throw std::invalid_argument(y);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad label in dataset row: " + line);
        }
        if (d.pairs.empty()) {
            d.n_bits = s.x.size();
        }
        d.pairs.push_back(std::move(s));
    }
    d.validate();
    return d;
}

}  // namespace qperceptron
