#include "manetlab/diag/diag.hpp"

namespace manetlab::diag {

std::string Diag::render(routing::Ipv4 addr) const
{
    if (auto node = m_net.node_by_address(addr))
        return *node;
    return netconfig::to_string(addr);
}

std::string Diag::route_dump(const link::NodeId& node) const
{
    std::string out;
    for (const auto& [dst, entry] : m_engine.routes(node).entries) {
        out += render(dst);
        out += " via ";
        out += render(entry.next_hop);
        out += " hops ";
        out += std::to_string(entry.hop_count);
        out += "\n";
    }
    return out;
}

} // namespace manetlab::diag
