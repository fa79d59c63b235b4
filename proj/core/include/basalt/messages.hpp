#pragma once

#include <variant>
#include <vector>

#include "basalt/node_id.hpp"

namespace basalt {

struct PullRequest {
    NodeId from;
    NodeId to;
};

/// A set of peer identifiers pushed to `to`. `reply` marks an answer to a pull.
struct PushMessage {
    NodeId from;
    NodeId to;
    std::vector<NodeId> peers;
    bool reply = false;
};

using Message = std::variant<PullRequest, PushMessage>;

inline NodeId destination(const Message& m) {
    return std::visit([](const auto& x) { return x.to; }, m);
}

} // namespace basalt
