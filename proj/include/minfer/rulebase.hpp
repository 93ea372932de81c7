#ifndef MINFER_RULEBASE_HPP
#define MINFER_RULEBASE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace minfer {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordered set of binary attribute names; ordering defines bit positions for
/// the lifetime of the space.
struct AttributeSpace {
    std::vector<std::string> names;

    std::size_t size() const { return names.size(); }

    std::size_t index_of(const std::string& name) const {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw ParseError("unknown attribute: " + name);
        return static_cast<std::size_t>(it - names.begin());
    }
};

/// One conjunct: attribute index plus required value.
struct Literal {
    std::size_t attribute;
    bool polarity;

    bool operator==(const Literal&) const = default;
};

/// Conjunctive rule with one marginal probability per class value.
struct Rule {
    std::string id;
    std::vector<Literal> lhs;                // distinct attributes, nonempty
    std::map<std::string, double> marginals; // class value -> p(lhs-values | class)

    bool operator==(const Rule&) const = default;

    double marginal_for(const std::string& cls) const {
        auto it = marginals.find(cls);
        if (it == marginals.end())
            throw std::runtime_error("rule '" + id + "' has no marginal for class '" + cls + "'");
        return it->second;
    }
};

/// Total assignment of every attribute.
struct Evidence {
    std::vector<bool> values;

    bool operator==(const Evidence&) const = default;
};

struct ClassModel {
    std::vector<std::string> classes;
    std::map<std::string, double> priors;

    double prior_for(const std::string& cls) const { return priors.at(cls); }
};

struct RuleBase {
    AttributeSpace attributes;
    std::vector<Rule> rules;
    ClassModel classes;

    bool operator==(const RuleBase& o) const {
        return attributes.names == o.attributes.names && rules == o.rules &&
               classes.classes == o.classes.classes && classes.priors == o.classes.priors;
    }
};

inline bool satisfies(const Rule& rule, const Evidence& evidence) {
    for (const Literal& lit : rule.lhs)
        if (evidence.values[lit.attribute] != lit.polarity) return false;
    return true;
}

/// Rules whose entire left-hand side holds in the evidence, in input order.
inline std::vector<std::size_t> firing_rules(const std::vector<Rule>& rules,
                                             const Evidence& evidence) {
    std::vector<std::size_t> firing;
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (satisfies(rules[i], evidence)) firing.push_back(i);
    return firing;
}

namespace detail {

inline void validate_rulebase(const RuleBase& rb) {
    const std::size_t n = rb.attributes.size();
    if (n < 1) throw ParseError("at least one attribute required");
    {
        std::set<std::string> seen;
        for (const auto& name : rb.attributes.names)
            if (!seen.insert(name).second) throw ParseError("duplicate attribute name: " + name);
    }
    if (rb.classes.classes.size() < 2) throw ParseError("at least two classes required");
    double prior_sum = 0.0;
    for (const auto& cls : rb.classes.classes) {
        auto it = rb.classes.priors.find(cls);
        if (it == rb.classes.priors.end()) throw ParseError("missing prior for class: " + cls);
        if (it->second < 0.0) throw ParseError("negative prior for class: " + cls);
        prior_sum += it->second;
    }
    if (std::abs(prior_sum - 1.0) > 1e-12)
        throw ParseError("priors do not sum to 1");
    for (const Rule& rule : rb.rules) {
        if (rule.lhs.empty()) throw ParseError("rule '" + rule.id + "' has empty lhs");
        std::set<std::size_t> attrs;
        for (const Literal& lit : rule.lhs) {
            if (lit.attribute >= n)
                throw ParseError("rule '" + rule.id + "' references attribute out of range");
            if (!attrs.insert(lit.attribute).second)
                throw ParseError("rule '" + rule.id + "' repeats an attribute in its lhs");
        }
        for (const auto& [cls, p] : rule.marginals) {
            if (std::find(rb.classes.classes.begin(), rb.classes.classes.end(), cls) ==
                rb.classes.classes.end())
                throw ParseError("rule '" + rule.id + "' has marginal for unknown class '" + cls + "'");
            if (p < 0.0 || p > 1.0)
                throw ParseError("rule '" + rule.id + "' marginal for '" + cls + "' outside [0,1]");
        }
    }
}

} // namespace detail

/// Parse and validate a JSON rule file.
inline RuleBase parse_rulebase(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("rule file syntax error: ") + e.what());
    }
    RuleBase rb;
    try {
        rb.attributes.names = j.at("attributes").get<std::vector<std::string>>();
        rb.classes.classes = j.at("classes").get<std::vector<std::string>>();
        rb.classes.priors = j.at("priors").get<std::map<std::string, double>>();
        for (const auto& jr : j.at("rules")) {
            Rule rule;
            rule.id = jr.at("id").get<std::string>();
            for (const auto& [name, val] : jr.at("lhs").items())
                rule.lhs.push_back({rb.attributes.index_of(name), val.get<bool>()});
            rule.marginals = jr.at("marginals").get<std::map<std::string, double>>();
            rb.rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("rule file structure error: ") + e.what());
    }
    detail::validate_rulebase(rb);
    return rb;
}

inline std::string serialize_rulebase(const RuleBase& rb) {
    nlohmann::json j;
    j["attributes"] = rb.attributes.names;
    j["classes"] = rb.classes.classes;
    j["priors"] = rb.classes.priors;
    j["rules"] = nlohmann::json::array();
    for (const Rule& rule : rb.rules) {
        nlohmann::json jr;
        jr["id"] = rule.id;
        jr["lhs"] = nlohmann::json::object();
        for (const Literal& lit : rule.lhs)
            jr["lhs"][rb.attributes.names[lit.attribute]] = lit.polarity;
        jr["marginals"] = rule.marginals;
        j["rules"].push_back(std::move(jr));
    }
    return j.dump(2);
}

/// Parse a JSON evidence file: a total assignment {"F1": true, ...}.
inline Evidence parse_evidence(const std::string& text, const AttributeSpace& space) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("evidence file syntax error: ") + e.what());
    }
    Evidence ev;
    ev.values.resize(space.size());
    std::vector<bool> seen(space.size(), false);
    for (const auto& [name, val] : j.items()) {
        std::size_t idx = space.index_of(name);
        if (!val.is_boolean()) throw ParseError("evidence value for " + name + " must be boolean");
        ev.values[idx] = val.get<bool>();
        seen[idx] = true;
    }
    for (std::size_t i = 0; i < space.size(); ++i)
        if (!seen[i]) throw ParseError("evidence missing attribute: " + space.names[i]);
    return ev;
}

/// Single rule from its JSON object form (as in the rule file's "rules" array).
inline Rule rule_from_json(const nlohmann::json& jr, const AttributeSpace& space) {
    Rule rule;
    try {
        rule.id = jr.at("id").get<std::string>();
        for (const auto& [name, val] : jr.at("lhs").items())
            rule.lhs.push_back({space.index_of(name), val.get<bool>()});
        rule.marginals = jr.at("marginals").get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("rule structure error: ") + e.what());
    }
    return rule;
}

inline std::string serialize_evidence(const Evidence& ev, const AttributeSpace& space) {
    nlohmann::json j;
    for (std::size_t i = 0; i < space.size(); ++i) j[space.names[i]] = (bool)ev.values[i];
    return j.dump(2);
}

} // namespace minfer

#endif
