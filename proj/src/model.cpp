#include "ocshield/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ocshield::model {

using nlohmann::json;

// ---------------------------------------------------------------- LeafBox

LeafBox LeafBox::closed_cube(std::size_t n_features, double lo, double hi) {
    LeafBox box(n_features);
    const double open_hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
    for (auto& iv : box.intervals) {
        iv.lo = lo;
        iv.hi = open_hi;
    }
    return box;
}

bool LeafBox::empty() const {
    for (const auto& iv : intervals)
        if (iv.empty()) return true;
    return false;
}

bool LeafBox::contains(std::span<const double> x) const {
    if (x.size() != intervals.size()) return false;
    for (std::size_t f = 0; f < intervals.size(); ++f)
        if (!intervals[f].contains(x[f])) return false;
    return true;
}

bool LeafBox::intersect_inplace(const LeafBox& other) {
    if (other.intervals.size() != intervals.size())
        raise(ErrorCode::DimensionMismatch, "box dimensions differ");
    bool nonempty = true;
    for (std::size_t f = 0; f < intervals.size(); ++f) {
        intervals[f].lo = std::max(intervals[f].lo, other.intervals[f].lo);
        intervals[f].hi = std::min(intervals[f].hi, other.intervals[f].hi);
        nonempty = nonempty && !intervals[f].empty();
    }
    return nonempty;
}

double LeafBox::distance(std::span<const double> x) const {
    double d = 0.0;
    for (std::size_t f = 0; f < intervals.size(); ++f)
        d = std::max(d, intervals[f].distance(x[f]));
    return d;
}

// ------------------------------------------------------------------- Tree

Tree::Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty())
        raise(ErrorCode::MalformedModel, "tree has no nodes");

    // Depth-first walk from the root: validates that the node graph is a
    // rooted binary tree (every node reached exactly once) and assigns
    // leaf ids in visitation order, left before right.
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::int32_t> stack{0};
    std::size_t visited = 0;
    while (!stack.empty()) {
        const std::int32_t idx = stack.back();
        stack.pop_back();
        if (idx < 0 || static_cast<std::size_t>(idx) >= nodes_.size())
            raise(ErrorCode::MalformedModel, "child index out of range");
        if (seen[static_cast<std::size_t>(idx)])
            raise(ErrorCode::MalformedModel, "node graph is not a tree");
        seen[static_cast<std::size_t>(idx)] = true;
        ++visited;

        Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.is_leaf()) {
            if (!std::isfinite(n.value))
                raise(ErrorCode::MalformedModel, "non-finite leaf value");
            if (leaf_values_.size() >= kMaxLeavesPerTree)
                raise(ErrorCode::LimitExceeded, "tree exceeds 256 leaves");
            n.leaf_id = static_cast<std::uint8_t>(leaf_values_.size());
            leaf_values_.push_back(n.value);
        } else {
            if (!std::isfinite(n.threshold))
                raise(ErrorCode::MalformedModel, "non-finite split threshold");
            if (n.left == n.right)
                raise(ErrorCode::MalformedModel, "internal node children are not distinct");
            // Right pushed first so the left subtree is visited first.
            stack.push_back(n.right);
            stack.push_back(n.left);
        }
    }
    if (visited != nodes_.size())
        raise(ErrorCode::MalformedModel, "unreachable nodes in tree");

    node_min_.resize(nodes_.size());
    node_max_.resize(nodes_.size());
    auto fill_bounds = [&](auto&& self, std::int32_t idx) -> void {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        if (n.is_leaf()) {
            node_min_[static_cast<std::size_t>(idx)] = n.value;
            node_max_[static_cast<std::size_t>(idx)] = n.value;
            return;
        }
        self(self, n.left);
        self(self, n.right);
        node_min_[static_cast<std::size_t>(idx)] =
            std::min(node_min_[static_cast<std::size_t>(n.left)],
                     node_min_[static_cast<std::size_t>(n.right)]);
        node_max_[static_cast<std::size_t>(idx)] =
            std::max(node_max_[static_cast<std::size_t>(n.left)],
                     node_max_[static_cast<std::size_t>(n.right)]);
    };
    fill_bounds(fill_bounds, 0);
}

std::int32_t Tree::descend(std::span<const double> x) const {
    std::int32_t idx = 0;
    while (!nodes_[static_cast<std::size_t>(idx)].is_leaf()) {
        const Node& n = nodes_[static_cast<std::size_t>(idx)];
        idx = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return idx;
}

std::vector<LeafBox> leaf_boxes(const Tree& tree, std::size_t n_features) {
    std::vector<LeafBox> boxes(tree.leaf_count());
    LeafBox current = LeafBox::full(n_features);

    // Recursive path walk; x[f] < t goes left (tightens hi), else right
    // (tightens lo).
    auto walk = [&](auto&& self, std::int32_t idx) -> void {
        const Node& n = tree.node(static_cast<std::size_t>(idx));
        if (n.is_leaf()) {
            boxes[n.leaf_id] = current;
            return;
        }
        const auto f = static_cast<std::size_t>(n.feature);
        Interval saved = current.intervals[f];
        current.intervals[f].hi = std::min(saved.hi, n.threshold);
        self(self, n.left);
        current.intervals[f] = saved;
        current.intervals[f].lo = std::max(saved.lo, n.threshold);
        self(self, n.right);
        current.intervals[f] = saved;
    };
    walk(walk, tree.root());
    return boxes;
}

// --------------------------------------------------------------- Ensemble

Ensemble::Ensemble(std::vector<Tree> trees, double base_score, Aggregation aggregation,
                   std::size_t n_features)
    : trees_(std::move(trees)),
      base_score_(base_score),
      aggregation_(aggregation),
      n_features_(n_features) {
    if (trees_.empty())
        raise(ErrorCode::MalformedModel, "ensemble has no trees");
    if (trees_.size() > kMaxTrees)
        raise(ErrorCode::LimitExceeded, "ensemble exceeds 255 trees");
    if (n_features_ == 0)
        raise(ErrorCode::MalformedModel, "n_features must be positive");
    if (!std::isfinite(base_score_))
        raise(ErrorCode::MalformedModel, "non-finite base_score");

    for (const Tree& t : trees_) {
        for (std::size_t i = 0; i < t.node_count(); ++i) {
            const Node& n = t.node(i);
            if (!n.is_leaf() && static_cast<std::size_t>(n.feature) >= n_features_)
                raise(ErrorCode::FeatureIndexOutOfRange, "split feature index out of range");
            if (n.is_leaf() && aggregation_ == Aggregation::AverageProb &&
                (n.value < 0.0 || n.value > 1.0))
                raise(ErrorCode::MalformedModel,
                      "average_prob leaf values must lie in [0,1]");
        }
    }
}

void Ensemble::check_input(std::span<const double> x) const {
    if (x.size() != n_features_)
        raise(ErrorCode::DimensionMismatch, "input has wrong number of features");
    for (double v : x)
        if (!std::isfinite(v)) raise(ErrorCode::NonFiniteInput, "non-finite feature value");
}

Prediction Ensemble::predict_from_leaf_sum(double leaf_sum) const {
    Prediction p;
    if (aggregation_ == Aggregation::SumLogistic) {
        p.raw = base_score_ + leaf_sum;
        p.prob = logistic(p.raw);
    } else {
        p.raw = leaf_sum / static_cast<double>(trees_.size());
        p.prob = p.raw;
    }
    p.label = p.prob >= 0.5 ? 1 : 0;
    return p;
}

Prediction Ensemble::evaluate(std::span<const double> x) const {
    check_input(x);
    double sum = 0.0;
    for (const Tree& t : trees_)
        sum += t.node(static_cast<std::size_t>(t.descend(x))).value;
    return predict_from_leaf_sum(sum);
}

std::vector<std::uint8_t> Ensemble::leaf_path(std::span<const double> x) const {
    check_input(x);
    std::vector<std::uint8_t> ids(trees_.size());
    for (std::size_t m = 0; m < trees_.size(); ++m)
        ids[m] = trees_[m].leaf_for(x);
    return ids;
}

// -------------------------------------------------------------- JSON I/O

namespace {

std::int32_t parse_node(const json& j, std::vector<Node>& nodes) {
    if (!j.is_object())
        raise(ErrorCode::MalformedModel, "tree node must be a JSON object");
    const auto idx = static_cast<std::int32_t>(nodes.size());
    nodes.emplace_back();

    if (j.contains("value")) {
        if (!j["value"].is_number())
            raise(ErrorCode::MalformedModel, "leaf value must be a number");
        nodes[static_cast<std::size_t>(idx)].value = j["value"].get<double>();
        return idx;
    }
    if (!j.contains("feature") || !j.contains("threshold") || !j.contains("left") ||
        !j.contains("right"))
        raise(ErrorCode::MalformedModel,
              "internal node needs feature, threshold, left, right");
    if (!j["feature"].is_number_integer() || !j["threshold"].is_number())
        raise(ErrorCode::MalformedModel, "bad feature or threshold type");

    const auto feature = j["feature"].get<std::int64_t>();
    if (feature < 0)
        raise(ErrorCode::FeatureIndexOutOfRange, "negative feature index");
    const double threshold = j["threshold"].get<double>();

    const std::int32_t left = parse_node(j["left"], nodes);
    const std::int32_t right = parse_node(j["right"], nodes);
    Node& n = nodes[static_cast<std::size_t>(idx)];
    n.feature = static_cast<std::int32_t>(feature);
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return idx;
}

json node_to_json(const Tree& tree, std::int32_t idx) {
    const Node& n = tree.node(static_cast<std::size_t>(idx));
    if (n.is_leaf()) return json{{"value", n.value}};
    return json{{"feature", n.feature},
                {"threshold", n.threshold},
                {"left", node_to_json(tree, n.left)},
                {"right", node_to_json(tree, n.right)}};
}

} // namespace

Ensemble parse_model(std::string_view json_text) {
    json j = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded())
        raise(ErrorCode::MalformedModel, "model file is not valid JSON");
    if (!j.is_object() || !j.contains("aggregation") || !j.contains("n_features") ||
        !j.contains("trees"))
        raise(ErrorCode::MalformedModel,
              "model needs aggregation, n_features and trees fields");

    Aggregation agg;
    const std::string agg_name = j["aggregation"].is_string()
                                     ? j["aggregation"].get<std::string>()
                                     : std::string();
    if (agg_name == "sum_logistic")
        agg = Aggregation::SumLogistic;
    else if (agg_name == "average_prob")
        agg = Aggregation::AverageProb;
    else
        raise(ErrorCode::MalformedModel, "unknown aggregation: '" + agg_name + "'");

    if (!j["n_features"].is_number_integer() || j["n_features"].get<std::int64_t>() <= 0)
        raise(ErrorCode::MalformedModel, "n_features must be a positive integer");
    const auto n_features = static_cast<std::size_t>(j["n_features"].get<std::int64_t>());

    double base_score = 0.0;
    if (j.contains("base_score")) {
        if (!j["base_score"].is_number())
            raise(ErrorCode::MalformedModel, "base_score must be a number");
        base_score = j["base_score"].get<double>();
    }

    if (!j["trees"].is_array() || j["trees"].empty())
        raise(ErrorCode::MalformedModel, "trees must be a non-empty array");
    if (j["trees"].size() > kMaxTrees)
        raise(ErrorCode::LimitExceeded, "ensemble exceeds 255 trees");

    std::vector<Tree> trees;
    trees.reserve(j["trees"].size());
    for (const json& tj : j["trees"]) {
        std::vector<Node> nodes;
        parse_node(tj, nodes);
        trees.emplace_back(std::move(nodes));
    }
    return Ensemble(std::move(trees), base_score, agg, n_features);
}

std::string serialize_model(const Ensemble& ensemble) {
    json j;
    j["aggregation"] = ensemble.aggregation() == Aggregation::SumLogistic
                           ? "sum_logistic"
                           : "average_prob";
    j["base_score"] = ensemble.base_score();
    j["n_features"] = ensemble.n_features();
    json trees = json::array();
    for (std::size_t m = 0; m < ensemble.tree_count(); ++m)
        trees.push_back(node_to_json(ensemble.tree(m), ensemble.tree(m).root()));
    j["trees"] = std::move(trees);
    return j.dump(2);
}

Ensemble load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

void save_model_file(const Ensemble& ensemble, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write model file: " + path);
    out << serialize_model(ensemble) << '\n';
}

} // namespace ocshield::model
