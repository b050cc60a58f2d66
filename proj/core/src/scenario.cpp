#include <algorithm>
#include <fstream>

#include "demorph/dataset.hpp"
#include "demorph/error.hpp"

namespace demorph {

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::One: return "scenario1";
        case Scenario::Two: return "scenario2";
        case Scenario::Three: return "scenario3";
        case Scenario::Invalid: return "invalid";
    }
    return "invalid";
}

Scenario classify_scenario(const ScenarioSplit& split) {
    if (split.train_identities.empty() || split.test_identities.empty()) {
        throw Error(ErrorCode::EmptySet, "train and test identity sets must both be nonempty");
    }
    const auto& train = split.train_identities;
    const auto& test = split.test_identities;
    if (std::includes(train.begin(), train.end(), test.begin(), test.end())) return Scenario::One;
    const bool overlap = std::any_of(test.begin(), test.end(), [&](const std::string& id) { return train.contains(id); });
    return overlap ? Scenario::Two : Scenario::Three;
}

std::set<std::string> read_id_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, path.string());
    std::set<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        ids.insert(line.substr(first, last - first + 1));
    }
    return ids;
}

}  // namespace demorph
