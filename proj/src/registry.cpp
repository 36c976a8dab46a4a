#include "sdcalc/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sdcalc {

namespace {

struct NameArgs {
    std::string head;
    std::vector<double> args;
};

NameArgs parse_name(const std::string& name) {
    NameArgs out;
    const auto colon = name.find(':');
    out.head = name.substr(0, colon);
    if (colon == std::string::npos) return out;
    std::string rest = name.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
        const auto comma = rest.find(',', pos);
        const std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
        try {
            std::size_t used = 0;
            out.args.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad numeric parameter '" + tok + "' in '" + name + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void need_args(const NameArgs& na, std::size_t n, const std::string& name) {
    if (na.args.size() != n)
        throw std::invalid_argument("process '" + name + "' expects " + std::to_string(n) +
                                    " parameter(s)");
}

}  // namespace

ProcessSpec make_x_spec(const std::string& name) {
    const NameArgs na = parse_name(name);
    ProcessSpec s;
    s.name = name;
    if (na.head == "const") {
        need_args(na, 1, name);
        const double v = na.args[0];
        s.eval = [v](const PathHistory&) { return v; };
    } else if (na.head == "linear_t") {
        s.eval = [](const PathHistory& h) { return h.time(); };
    } else if (na.head == "cos_t_times_B") {
        s.eval = [](const PathHistory& h) { return std::cos(h.time()) * h.b(); };
    } else if (na.head == "B_itself") {
        s.eval = [](const PathHistory& h) { return h.b(); };
    } else if (na.head == "scale_B") {
        need_args(na, 1, name);
        const double a = na.args[0];
        s.eval = [a](const PathHistory& h) { return a * h.b(); };
    } else if (na.head == "self") {
        // X_t = S_t: the exponential local martingale dS = S dB
        s.eval = [](const PathHistory& h) { return h.s(); };
    } else if (na.head == "indicator_Bpos") {
        s.eval = [](const PathHistory& h) { return h.b() > 0.0 ? 1.0 : 0.0; };
        s.continuous = false;
    } else if (na.head == "step") {
        need_args(na, 1, name);
        const double t0 = na.args[0];
        s.eval = [t0](const PathHistory& h) { return h.time() >= t0 ? 1.0 : 0.0; };
        s.continuous = false;
    } else if (na.head == "sin2pi_t") {
        s.eval = [](const PathHistory& h) { return std::sin(2.0 * std::numbers::pi * h.time()); };
    } else {
        throw std::invalid_argument("unknown X process '" + name + "'");
    }
    return s;
}

ProcessSpec make_v_spec(const std::string& name) {
    const NameArgs na = parse_name(name);
    ProcessSpec s;
    s.name = name;
    if (na.head == "zero") {
        s.eval = [](const PathHistory&) { return 0.0; };
    } else if (na.head == "neg_t") {
        s.eval = [](const PathHistory& h) { return -h.time(); };
    } else if (na.head == "pos_t") {
        s.eval = [](const PathHistory& h) { return h.time(); };
    } else if (na.head == "t_squared") {
        s.eval = [](const PathHistory& h) { return h.time() * h.time(); };
    } else {
        throw std::invalid_argument("unknown V process '" + name + "'");
    }
    return s;
}

FunctionSpec make_f_spec(const std::string& name) {
    const NameArgs na = parse_name(name);
    if (na.head == "identity") return fn_identity();
    if (na.head == "power") {
        need_args(na, 1, name);
        return fn_power(na.args[0]);
    }
    if (na.head == "abs") return fn_abs();
    if (na.head == "exp") return fn_exp();
    if (na.head == "cubic") return fn_cubic();
    if (na.head == "affine") {
        need_args(na, 2, name);
        return fn_affine(na.args[0], na.args[1]);
    }
    if (na.head == "relu") return fn_relu();
    throw std::invalid_argument("unknown function '" + name + "'");
}

std::vector<std::string> x_spec_names() {
    return {"const:<v>", "linear_t",       "cos_t_times_B", "B_itself", "scale_B:<a>",
            "self",      "indicator_Bpos", "step:<t0>",     "sin2pi_t"};
}

std::vector<std::string> v_spec_names() { return {"zero", "neg_t", "pos_t", "t_squared"}; }

std::vector<std::string> f_spec_names() {
    return {"identity", "power:<p>", "abs", "exp", "cubic", "affine:<a>,<b>", "relu"};
}

std::vector<std::string> rule_names() {
    return {"ftsc_deriv", "ftsc_int", "ae_theorem", "chain",    "chain_convex",
            "composition", "power",   "sum",        "product",  "ratio",
            "smvt",        "mono_lip", "mart_deriv", "kernel_cubic"};
}

bool is_rule_name(const std::string& name) {
    const auto names = rule_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

}  // namespace sdcalc
