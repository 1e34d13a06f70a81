#pragma once

#include <string>
#include <vector>

namespace manetlab::harness {

enum class Answer { Yes, No, Partial };

// One row of the MANET solutions check-list: can the technology work without
// Internet connectivity, span multiple hops, serve unmodified applications,
// leave other wireless networks usable, and talk to other systems?
struct TechnologyProfile
{
    std::string name;
    Answer no_internet_needed = Answer::No;
    Answer multi_hop = Answer::No;
    Answer any_app = Answer::No;
    Answer no_other_wireless = Answer::No;
    Answer other_systems = Answer::No;
};

const char* to_string(Answer a);

std::vector<TechnologyProfile> builtin_taxonomy();

std::string taxonomy_csv(const std::vector<TechnologyProfile>& rows = builtin_taxonomy());
std::string taxonomy_table(const std::vector<TechnologyProfile>& rows = builtin_taxonomy());

} // namespace manetlab::harness
