#include "dmc/explicit_format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dmc {

namespace {

struct Line {
    long number;
    std::vector<std::string> tokens;
};

std::vector<Line> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<Line> out;
    std::string text;
    long number = 0;
    while (std::getline(in, text)) {
        ++number;
        if (auto pos = text.find('#'); pos != std::string::npos) text.resize(pos);
        std::istringstream ss(text);
        Line line{number, {}};
        std::string tok;
        while (ss >> tok) line.tokens.push_back(tok);
        if (!line.tokens.empty()) out.push_back(std::move(line));
    }
    return out;
}

std::uint32_t parse_state(const std::string& tok, long line) {
    std::uint32_t v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError("expected a state index, got '" + tok + "'", line);
    return v;
}

std::int64_t parse_reward(const std::string& tok, long line) {
    std::int64_t v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        throw ParseError("expected an integer reward, got '" + tok + "'", line);
    return v;
}

double parse_prob(const std::string& tok, long line) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a probability, got '" + tok + "'", line);
    }
}

void renormalize_rows(std::vector<std::vector<Transition>>& rows) {
    for (auto& row : rows) {
        double sum = 0.0;
        for (const auto& t : row) sum += t.prob;
        if (sum > 0.0 && std::abs(sum - 1.0) > kRowSumTolerance && std::abs(sum - 1.0) < 1e-6)
            for (auto& t : row) t.prob /= sum;
    }
}

Labeling parse_labels(const std::string& path, std::uint32_t num_states, StateId& initial) {
    Labeling labeling;
    labeling.labels.resize(num_states);
    bool saw_init = false;
    for (const auto& line : read_lines(path)) {
        // "state:" may be glued or separated
        std::string first = line.tokens[0];
        std::vector<std::string> labels(line.tokens.begin() + 1, line.tokens.end());
        if (auto pos = first.find(':'); pos != std::string::npos) {
            if (pos + 1 < first.size()) labels.insert(labels.begin(), first.substr(pos + 1));
            first.resize(pos);
        } else if (!labels.empty() && labels[0] == ":") {
            labels.erase(labels.begin());
        } else {
            throw ParseError("expected 'state: labels...'", line.number);
        }
        const StateId s = parse_state(first, line.number);
        if (s >= num_states) throw ParseError("label for out-of-range state", line.number);
        for (const auto& name : labels) {
            if (name == "init") {
                if (saw_init && initial != s)
                    throw ValidationError({"multiple states labelled init"});
                initial = s;
                saw_init = true;
            }
            labeling.add_label(s, labeling.intern(name));
        }
    }
    return labeling;
}

std::uint32_t parse_header(const std::vector<Line>& lines, const std::string& path) {
    if (lines.empty() || lines[0].tokens.size() != 2 || lines[0].tokens[0] != "STATES")
        throw ParseError(path + ": expected header 'STATES n'", lines.empty() ? 1 : lines[0].number);
    return parse_state(lines[0].tokens[1], lines[0].number);
}

} // namespace

ParsedModel parse_model(const ModelFiles& files, ModelKind kind, bool renormalize) {
    auto lines = read_lines(files.transitions);
    const std::uint32_t num_states = parse_header(lines, files.transitions);

    if (kind == ModelKind::infer) {
        if (lines.size() < 2) throw ParseError("no transitions", 1);
        kind = lines[1].tokens.size() == 3 ? ModelKind::dtmc : ModelKind::mdp;
    }

    StateId initial = 0;

    if (kind == ModelKind::dtmc) {
        DtmcModel model;
        model.dtmc.num_states = num_states;
        model.dtmc.rows.resize(num_states);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto& ln = lines[i];
            if (ln.tokens.size() != 3)
                throw ParseError("expected 'src dst prob'", ln.number);
            const StateId src = parse_state(ln.tokens[0], ln.number);
            const StateId dst = parse_state(ln.tokens[1], ln.number);
            if (src >= num_states || dst >= num_states)
                throw ParseError("state index out of range", ln.number);
            model.dtmc.rows[src].push_back({dst, parse_prob(ln.tokens[2], ln.number)});
        }
        if (renormalize) renormalize_rows(model.dtmc.rows);
        model.dtmc.labeling = parse_labels(files.labels, num_states, initial);
        model.dtmc.initial = initial;
        for (const auto& [name, path] : files.rewards) {
            StateRewards rew(num_states, 0);
            for (const auto& ln : read_lines(path)) {
                if (ln.tokens.size() != 2)
                    throw ParseError("expected 'src reward'", ln.number);
                const StateId s = parse_state(ln.tokens[0], ln.number);
                if (s >= num_states) throw ParseError("state index out of range", ln.number);
                rew[s] = parse_reward(ln.tokens[1], ln.number);
            }
            model.rewards[name] = std::move(rew);
        }
        auto violations = validate(model.dtmc);
        for (const auto& [name, rew] : model.rewards) {
            auto more = validate_rewards(model.dtmc, rew);
            violations.insert(violations.end(), more.begin(), more.end());
        }
        if (!violations.empty()) throw ValidationError(violations);
        return model;
    }

    MdpModel model;
    model.mdp.num_states = num_states;
    model.mdp.choices.resize(num_states);
    std::vector<std::map<std::string, std::size_t>> action_index(num_states);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& ln = lines[i];
        if (ln.tokens.size() != 4)
            throw ParseError("expected 'src action dst prob'", ln.number);
        const StateId src = parse_state(ln.tokens[0], ln.number);
        const StateId dst = parse_state(ln.tokens[2], ln.number);
        if (src >= num_states || dst >= num_states)
            throw ParseError("state index out of range", ln.number);
        const std::string& act = ln.tokens[1];
        auto [it, inserted] = action_index[src].emplace(act, model.mdp.choices[src].size());
        if (inserted) model.mdp.choices[src].push_back({act, {}});
        model.mdp.choices[src][it->second].transitions.push_back(
            {dst, parse_prob(ln.tokens[3], ln.number)});
    }
    if (renormalize)
        for (auto& actions : model.mdp.choices)
            for (auto& a : actions) {
                std::vector<std::vector<Transition>> one{a.transitions};
                renormalize_rows(one);
                a.transitions = one[0];
            }
    model.mdp.labeling = parse_labels(files.labels, num_states, initial);
    model.mdp.initial = initial;
    for (const auto& [name, path] : files.rewards) {
        ActionRewards rew(num_states);
        for (StateId s = 0; s < num_states; ++s) rew[s].assign(model.mdp.choices[s].size(), 0);
        for (const auto& ln : read_lines(path)) {
            if (ln.tokens.size() != 3)
                throw ParseError("expected 'src action reward'", ln.number);
            const StateId s = parse_state(ln.tokens[0], ln.number);
            if (s >= num_states) throw ParseError("state index out of range", ln.number);
            auto it = action_index[s].find(ln.tokens[1]);
            if (it == action_index[s].end())
                throw ParseError("unknown action '" + ln.tokens[1] + "' for state " +
                                     std::to_string(s),
                                 ln.number);
            rew[s][it->second] = parse_reward(ln.tokens[2], ln.number);
        }
        model.rewards[name] = std::move(rew);
    }
    auto violations = validate(model.mdp);
    for (const auto& [name, rew] : model.rewards) {
        auto more = validate_rewards(model.mdp, rew);
        violations.insert(violations.end(), more.begin(), more.end());
    }
    if (!violations.empty()) throw ValidationError(violations);
    return model;
}

namespace {

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

void write_labels(const Labeling& labeling, StateId initial, std::uint32_t num_states,
                  const std::string& path) {
    auto out = open_out(path);
    for (StateId s = 0; s < num_states; ++s) {
        const bool is_init = s == initial;
        if (labeling.labels[s].empty() && !is_init) continue;
        out << s << ":";
        if (is_init && labeling.atom_id("init") < 0) out << " init";
        for (auto a : labeling.labels[s]) out << ' ' << labeling.atom_names[a];
        out << '\n';
    }
}

} // namespace

void write_model(const DtmcModel& model, const std::string& prefix) {
    auto tra = open_out(prefix + ".tra");
    tra << "STATES " << model.dtmc.num_states << '\n';
    for (StateId s = 0; s < model.dtmc.num_states; ++s)
        for (const auto& t : model.dtmc.rows[s])
            tra << s << ' ' << t.target << ' ' << fmt(t.prob) << '\n';
    write_labels(model.dtmc.labeling, model.dtmc.initial, model.dtmc.num_states, prefix + ".lab");
    for (const auto& [name, rew] : model.rewards) {
        auto out = open_out(prefix + "." + name + ".rew");
        for (StateId s = 0; s < model.dtmc.num_states; ++s)
            if (rew[s] != 0) out << s << ' ' << rew[s] << '\n';
    }
}

void write_model(const MdpModel& model, const std::string& prefix) {
    auto tra = open_out(prefix + ".tra");
    tra << "STATES " << model.mdp.num_states << '\n';
    for (StateId s = 0; s < model.mdp.num_states; ++s)
        for (const auto& c : model.mdp.choices[s])
            for (const auto& t : c.transitions)
                tra << s << ' ' << c.label << ' ' << t.target << ' ' << fmt(t.prob) << '\n';
    write_labels(model.mdp.labeling, model.mdp.initial, model.mdp.num_states, prefix + ".lab");
    for (const auto& [name, rew] : model.rewards) {
        auto out = open_out(prefix + "." + name + ".rew");
        for (StateId s = 0; s < model.mdp.num_states; ++s)
            for (std::size_t a = 0; a < rew[s].size(); ++a)
                if (rew[s][a] != 0)
                    out << s << ' ' << model.mdp.choices[s][a].label << ' ' << rew[s][a] << '\n';
    }
}

ModelFiles model_files_for_prefix(const std::string& prefix,
                                  const std::vector<std::string>& reward_names) {
    ModelFiles files;
    files.transitions = prefix + ".tra";
    files.labels = prefix + ".lab";
    for (const auto& name : reward_names) files.rewards.emplace_back(name, prefix + "." + name + ".rew");
    return files;
}

void write_distribution(std::span<const WeightedPoint> points, double p_inf,
                        const std::string& path, DistFormat format) {
    auto out = open_out(path);
    if (format == DistFormat::csv) {
        out << "value,probability\n";
        for (const auto& pt : points) out << fmt(pt.value) << ',' << fmt(pt.prob) << '\n';
        if (p_inf > 0.0) out << "inf," << fmt(p_inf) << '\n';
        return;
    }
    nlohmann::json j;
    j["support"] = nlohmann::json::array();
    j["probs"] = nlohmann::json::array();
    for (const auto& pt : points) {
        j["support"].push_back(pt.value);
        j["probs"].push_back(pt.prob);
    }
    j["p_inf"] = p_inf;
    out << j.dump(2) << '\n';
}

void write_distribution(const SparseDist& d, const std::string& path, DistFormat format) {
    write_distribution(std::span<const WeightedPoint>(d.points()), d.p_inf, path, format);
}
void write_distribution(const CategoricalDist& d, const std::string& path, DistFormat format) {
    write_distribution(std::span<const WeightedPoint>(d.points()), 0.0, path, format);
}
void write_distribution(const QuantileDist& d, const std::string& path, DistFormat format) {
    write_distribution(std::span<const WeightedPoint>(d.points()), 0.0, path, format);
}

std::pair<std::vector<WeightedPoint>, double> read_distribution(const std::string& path,
                                                                DistFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<WeightedPoint> points;
    double p_inf = 0.0;
    if (format == DistFormat::csv) {
        std::string line;
        long number = 0;
        while (std::getline(in, line)) {
            ++number;
            if (number == 1 || line.empty() || line[0] == '#') continue;
            auto comma = line.find(',');
            if (comma == std::string::npos) throw ParseError("expected 'value,probability'", number);
            const std::string value = line.substr(0, comma);
            const double prob = parse_prob(line.substr(comma + 1), number);
            if (value == "inf")
                p_inf = prob;
            else
                points.push_back({parse_prob(value, number), prob});
        }
        return {points, p_inf};
    }
    nlohmann::json j = nlohmann::json::parse(in);
    for (std::size_t i = 0; i < j["support"].size(); ++i)
        points.push_back({j["support"][i].get<double>(), j["probs"][i].get<double>()});
    p_inf = j.value("p_inf", 0.0);
    return {points, p_inf};
}

} // namespace dmc
