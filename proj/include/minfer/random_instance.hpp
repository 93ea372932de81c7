#ifndef MINFER_RANDOM_INSTANCE_HPP
#define MINFER_RANDOM_INSTANCE_HPP

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "minfer/experiments.hpp"
#include "minfer/rulebase.hpp"

// Random rule-base instances for oracle cross-checks. Every generated rule
// fires on the generated evidence by construction.

namespace minfer {

struct RandomInstance {
    RuleBase rb;
    Evidence evidence;
};

inline RandomInstance random_instance(std::size_t n_max, std::size_t r_max,
                                      experiments::Rng& rng,
                                      bool force_duplicate = false) {
    RandomInstance inst;
    const std::size_t n = 1 + rng() % n_max;
    const std::size_t nr = 1 + rng() % r_max;
    for (std::size_t i = 0; i < n; ++i)
        inst.rb.attributes.names.push_back("F" + std::to_string(i + 1));
    inst.rb.classes.classes = {"x", "xbar"};
    inst.rb.classes.priors = {{"x", 0.5}, {"xbar", 0.5}};
    inst.evidence.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) inst.evidence.values[i] = rng() & 1;

    for (std::size_t i = 0; i < nr; ++i) {
        Rule rule;
        rule.id = "r" + std::to_string(i + 1);
        // random nonempty attribute subset, literals pinned to the evidence
        std::vector<std::size_t> attrs;
        for (std::size_t a = 0; a < n; ++a)
            if (rng() & 1) attrs.push_back(a);
        if (attrs.empty()) attrs.push_back(rng() % n);
        for (std::size_t a : attrs) rule.lhs.push_back({a, (bool)inst.evidence.values[a]});
        rule.marginals["x"] = experiments::uniform01(rng);
        rule.marginals["xbar"] = experiments::uniform01(rng);
        inst.rb.rules.push_back(std::move(rule));
    }
    if (force_duplicate && nr >= 1) {
        Rule dup = inst.rb.rules[rng() % nr];
        dup.id += "_dup";
        inst.rb.rules.push_back(std::move(dup));
    }
    return inst;
}

} // namespace minfer

#endif
