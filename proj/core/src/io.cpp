#include "rewardlab/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_detail.hpp"
#include "rewardlab/errors.hpp"

namespace rewardlab {

namespace detail {

nlohmann::json parse_text(const std::string& text) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what()); // carries "at line L, column C"
    }
}

const nlohmann::json& require(const nlohmann::json& value, const char* key) {
    const auto it = value.find(key);
    if (it == value.end()) throw ParseError(std::string("missing required key: ") + key);
    return *it;
}

namespace {

std::vector<std::string> name_list(const nlohmann::json& value, const char* key) {
    const nlohmann::json& arr = require(value, key);
    if (!arr.is_array() || arr.empty())
        throw ParseError(std::string(key) + " must be a non-empty array");
    std::vector<std::string> names;
    for (const auto& v : arr) {
        if (!v.is_string()) throw ParseError(std::string(key) + " entries must be strings");
        names.push_back(v.get<std::string>());
    }
    return names;
}

double number_at(const nlohmann::json& value, const char* key) {
    const nlohmann::json& v = require(value, key);
    if (!v.is_number()) throw ParseError(std::string(key) + " must be a number");
    return v.get<double>();
}

Vec vec_from(const nlohmann::json& arr, const char* key, int expected) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expected)
        throw ParseError(std::string(key) + " must be an array of length " +
                         std::to_string(expected));
    Vec out(expected);
    for (int i = 0; i < expected; ++i) {
        if (!arr[static_cast<std::size_t>(i)].is_number())
            throw ParseError(std::string(key) + " entries must be numbers");
        out[i] = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

Mat table_from(const nlohmann::json& rows, const char* key, int num_states, int num_actions) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != num_states)
        throw ParseError(std::string(key) + " must have one row per state");
    Mat out(num_states, num_actions);
    for (int s = 0; s < num_states; ++s)
        out.row(s) = vec_from(rows[static_cast<std::size_t>(s)], key, num_actions).transpose();
    return out;
}

nlohmann::json table_to(const Mat& values) {
    nlohmann::json rows = nlohmann::json::array();
    for (int s = 0; s < values.rows(); ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < values.cols(); ++a) row.push_back(values(s, a));
        rows.push_back(std::move(row));
    }
    return rows;
}

TabularMdp skeleton_from_value(const nlohmann::json& value) {
    std::vector<std::string> states = name_list(value, "states");
    std::vector<std::string> actions = name_list(value, "actions");
    const int ns = static_cast<int>(states.size());
    const int na = static_cast<int>(actions.size());
    const double gamma = number_at(value, "gamma");
    const Vec mu0 = vec_from(require(value, "mu0"), "mu0", ns);

    const nlohmann::json& trans = require(value, "transition");
    if (!trans.is_array() || static_cast<int>(trans.size()) != ns)
        throw ParseError("transition must have one entry per state");
    Mat kernel(ns * na, ns);
    for (int s = 0; s < ns; ++s) {
        const auto& per_action = trans[static_cast<std::size_t>(s)];
        if (!per_action.is_array() || static_cast<int>(per_action.size()) != na)
            throw ParseError("transition rows must have one entry per action");
        for (int a = 0; a < na; ++a)
            kernel.row(sa_index(s, a, na)) =
                vec_from(per_action[static_cast<std::size_t>(a)], "transition", ns).transpose();
    }
    try {
        return TabularMdp(std::move(states), std::move(actions), std::move(kernel), mu0, gamma);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

nlohmann::json skeleton_to_value(const TabularMdp& mdp) {
    nlohmann::json out;
    out["states"] = mdp.state_names();
    out["actions"] = mdp.action_names();
    out["gamma"] = mdp.gamma();
    nlohmann::json mu0 = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s) mu0.push_back(mdp.initial()[s]);
    out["mu0"] = std::move(mu0);
    nlohmann::json trans = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s) {
        nlohmann::json per_action = nlohmann::json::array();
        for (int a = 0; a < mdp.num_actions(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (int s2 = 0; s2 < mdp.num_states(); ++s2)
                row.push_back(mdp.successor_row(s, a)[s2]);
            per_action.push_back(std::move(row));
        }
        trans.push_back(std::move(per_action));
    }
    out["transition"] = std::move(trans);
    return out;
}

} // namespace

Momdp momdp_from_value(const nlohmann::json& value) {
    TabularMdp skeleton = skeleton_from_value(value);
    const nlohmann::json& rewards = require(value, "rewards");
    if (!rewards.is_array() || rewards.empty())
        throw ParseError("rewards must be a non-empty array of tables");
    std::vector<RewardTable> tables;
    for (const auto& entry : rewards)
        tables.emplace_back(
            table_from(entry, "rewards", skeleton.num_states(), skeleton.num_actions()));
    return Momdp(std::move(skeleton), std::move(tables));
}

nlohmann::json momdp_to_value(const Momdp& momdp) {
    nlohmann::json out = skeleton_to_value(momdp.mdp());
    nlohmann::json rewards = nlohmann::json::array();
    for (const RewardTable& r : momdp.rewards()) rewards.push_back(table_to(r.values()));
    out["rewards"] = std::move(rewards);
    return out;
}

ObjectiveSpec objective_from_value(const nlohmann::json& value) {
    ObjectiveSpec spec;
    const nlohmann::json& kind = require(value, "kind");
    if (!kind.is_string()) throw ParseError("objective kind must be a string");
    try {
        spec.kind = objective_kind_from_name(kind.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    if (value.contains("thresholds"))
        spec.thresholds = vec_from(value["thresholds"], "thresholds",
                                   static_cast<int>(value["thresholds"].size()));
    if (value.contains("c")) spec.c = number_at(value, "c");
    if (value.contains("alpha")) spec.alpha = number_at(value, "alpha");
    if (value.contains("weights"))
        spec.weights = vec_from(value["weights"], "weights",
                                static_cast<int>(value["weights"].size()));
    return spec;
}

nlohmann::json objective_to_value(const ObjectiveSpec& spec) {
    nlohmann::json out;
    out["kind"] = objective_kind_name(spec.kind);
    if (spec.thresholds.size() > 0) {
        nlohmann::json t = nlohmann::json::array();
        for (int i = 0; i < spec.thresholds.size(); ++i) t.push_back(spec.thresholds[i]);
        out["thresholds"] = std::move(t);
    }
    if (spec.kind == ObjectiveKind::ConSat) out["c"] = spec.c;
    if (spec.kind == ObjectiveKind::SoftMaxMax || spec.kind == ObjectiveKind::SoftMaxMin ||
        spec.kind == ObjectiveKind::SoftMaxSat)
        out["alpha"] = spec.alpha;
    if (spec.weights.size() > 0) {
        nlohmann::json w = nlohmann::json::array();
        for (int i = 0; i < spec.weights.size(); ++i) w.push_back(spec.weights[i]);
        out["weights"] = std::move(w);
    }
    return out;
}

AffordanceMdp affordance_from_value(const nlohmann::json& value) {
    TabularMdp skeleton = skeleton_from_value(value);
    const int ns = skeleton.num_states();
    const int na = skeleton.num_actions();

    std::vector<Affordance> affordances;
    if (value.contains("affordances")) {
        if (!value["affordances"].is_array()) throw ParseError("affordances must be an array");
        for (const auto& entry : value["affordances"]) {
            Affordance aff;
            aff.reward = RewardTable(table_from(require(entry, "reward"), "affordance reward", ns, na));
            aff.discount = number_at(entry, "gamma");
            affordances.push_back(std::move(aff));
        }
    }

    const nlohmann::json& form_value = require(value, "modal_form");
    ModalForm form;
    const nlohmann::json& kind = require(form_value, "kind");
    if (!kind.is_string()) throw ParseError("modal_form.kind must be a string");
    form.kind = modal_form_kind_from_name(kind.get<std::string>());
    form.base_reward = RewardTable(table_from(require(form_value, "base_reward"), "base_reward", ns, na));
    if (form_value.contains("affordance_index"))
        form.affordance_index = form_value["affordance_index"].get<int>();
    if (form_value.contains("scale")) form.scale = number_at(form_value, "scale");

    try {
        return AffordanceMdp(std::move(skeleton), std::move(affordances), std::move(form));
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
}

nlohmann::json affordance_to_value(const AffordanceMdp& amdp) {
    nlohmann::json out = skeleton_to_value(amdp.skeleton());
    nlohmann::json affs = nlohmann::json::array();
    for (const Affordance& aff : amdp.affordances()) {
        nlohmann::json a;
        a["reward"] = table_to(aff.reward.values());
        a["gamma"] = aff.discount;
        affs.push_back(std::move(a));
    }
    out["affordances"] = std::move(affs);
    nlohmann::json form;
    form["kind"] = modal_form_kind_name(amdp.form().kind);
    form["base_reward"] = table_to(amdp.form().base_reward.values());
    form["affordance_index"] = amdp.form().affordance_index;
    form["scale"] = amdp.form().scale;
    out["modal_form"] = std::move(form);
    return out;
}

UtilityTransform transform_from_value(const nlohmann::json& value) {
    const nlohmann::json& kind = require(value, "kind");
    if (!kind.is_string()) throw ParseError("transform kind must be a string");
    UtilityTransform t;
    t.kind = transform_kind_from_name(kind.get<std::string>());
    if (value.contains("alpha")) t.alpha = number_at(value, "alpha");
    if (value.contains("b")) t.b = number_at(value, "b");
    if (value.contains("a")) t.a = number_at(value, "a");
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return t;
}

nlohmann::json transform_to_value(const UtilityTransform& transform) {
    nlohmann::json out;
    out["kind"] = transform_kind_name(transform.kind);
    switch (transform.kind) {
        case TransformKind::Exponential:
        case TransformKind::Isoelastic:
        case TransformKind::Quadratic: out["alpha"] = transform.alpha; break;
        case TransformKind::Affine:
            out["b"] = transform.b;
            out["a"] = transform.a;
            break;
        case TransformKind::Logarithmic: break;
    }
    return out;
}

} // namespace detail

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot write file: " + tmp);
        out << content;
        out.flush();
        if (!out) throw ParseError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, target);
}

Momdp momdp_from_json(const std::string& text) {
    return detail::momdp_from_value(detail::parse_text(text));
}

std::string momdp_to_json(const Momdp& momdp) { return detail::momdp_to_value(momdp).dump(2); }

Momdp load_momdp(const std::string& path) { return momdp_from_json(read_file(path)); }

ObjectiveSpec objective_from_json(const std::string& text) {
    return detail::objective_from_value(detail::parse_text(text));
}

std::string objective_to_json(const ObjectiveSpec& spec) {
    return detail::objective_to_value(spec).dump(2);
}

AffordanceMdp affordance_mdp_from_json(const std::string& text) {
    return detail::affordance_from_value(detail::parse_text(text));
}

std::string affordance_mdp_to_json(const AffordanceMdp& amdp) {
    return detail::affordance_to_value(amdp).dump(2);
}

AffordanceMdp load_affordance_mdp(const std::string& path) {
    return affordance_mdp_from_json(read_file(path));
}

UtilityTransform transform_from_json(const std::string& text) {
    return detail::transform_from_value(detail::parse_text(text));
}

std::string transform_to_json(const UtilityTransform& transform) {
    return detail::transform_to_value(transform).dump(2);
}

std::string validate_document(const std::string& text) {
    const nlohmann::json value = detail::parse_text(text);
    if (!value.is_object()) throw ParseError("document root must be an object");
    if (value.contains("modal_form")) {
        const AffordanceMdp amdp = detail::affordance_from_value(value);
        return "affordance mdp: " + std::to_string(amdp.skeleton().num_states()) + " states, " +
               std::to_string(amdp.skeleton().num_actions()) + " actions, " +
               std::to_string(amdp.num_affordances()) + " affordances";
    }
    if (value.contains("transition")) {
        const Momdp momdp = detail::momdp_from_value(value);
        return "momdp: " + std::to_string(momdp.mdp().num_states()) + " states, " +
               std::to_string(momdp.mdp().num_actions()) + " actions, " +
               std::to_string(momdp.num_rewards()) + " rewards";
    }
    if (value.contains("kind")) {
        const std::string kind = value["kind"].get<std::string>();
        // Transform kinds are lowercase, objective kinds CamelCase.
        if (!kind.empty() && std::islower(static_cast<unsigned char>(kind[0]))) {
            detail::transform_from_value(value);
            return "transform: " + kind;
        }
        const ObjectiveSpec spec = detail::objective_from_value(value);
        return std::string("objective: ") + objective_kind_name(spec.kind);
    }
    throw ParseError("unrecognized document: expected momdp, affordance mdp, objective or transform");
}

} // namespace rewardlab
