#pragma once

#include <string_view>

// Default copies of the files under data/, compiled into the library.
namespace litpipe::embedded {

std::string_view qc_rules_json();
std::string_view judge_rubric();

}  // namespace litpipe::embedded
