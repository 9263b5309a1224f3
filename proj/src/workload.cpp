// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0

#include "cfe/workload.hpp"

#include <cassert>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cfe/errors.hpp"
#include "cfe/rng.hpp"

namespace cfe {

namespace {

constexpr char kCorpusHeader[] =
    "workflow_id,task_id,workload_mi,memory_mb,output_mb";

void check_range(const RealRange& r, const char* name, bool positive_lo) {
  if (r.lo > r.hi)
    throw ConfigError(std::string("generator: ") + name +
                      ": range is not ordered");
  if (positive_lo && r.lo <= 0.0)
    throw ConfigError(std::string("generator: ") + name +
                      ": range must be positive");
  if (!positive_lo && r.lo < 0.0)
    throw ConfigError(std::string("generator: ") + name +
                      ": range must be non-negative");
}

// round-trip-exact double formatting
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double_field(const std::string& s, const char* field, int lineno) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError("corpus line " + std::to_string(lineno) + ": field `" +
                      field + "`: not a number: " + s);
  return v;
}

}  // namespace

void GenSpec::validate() const {
  if (count <= 0) throw ConfigError("generator: count must be positive");
  check_range(workload_mi, "workload_mi", true);
  check_range(memory_mb, "memory_mb", true);
  check_range(output_mb, "output_mb", false);
}

Workflow generate_workflow(const GenSpec& spec, int index) {
  spec.validate();
  assert(index >= 0 && index < spec.count);
  SplitMix64 rng = substream(spec.seed, static_cast<std::uint64_t>(spec.level),
                             static_cast<std::uint64_t>(index));
  const TaskCountBand band = task_count_band(spec.level);
  const int count = static_cast<int>(rng.uniform_int(
      static_cast<std::uint64_t>(band.lo), static_cast<std::uint64_t>(band.hi)));

  Workflow wf;
  wf.level = spec.level;
  {
    std::ostringstream id;
    id << to_string(spec.level) << '-' << spec.seed << '-' << index;
    wf.id = id.str();
  }
  wf.tasks.reserve(static_cast<std::size_t>(count));
  for (int t = 1; t <= count; ++t) {
    Task task;
    task.id = t;
    task.workload_mi = rng.uniform(spec.workload_mi.lo, spec.workload_mi.hi);
    task.memory_mb = rng.uniform(spec.memory_mb.lo, spec.memory_mb.hi);
    task.output_mb = rng.uniform(spec.output_mb.lo, spec.output_mb.hi);
    wf.tasks.push_back(task);
  }
  return wf;
}

std::vector<Workflow> generate_corpus(const GenSpec& spec) {
  spec.validate();
  std::vector<Workflow> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) out.push_back(generate_workflow(spec, i));
  return out;
}

void save_workflows(const std::vector<Workflow>& workflows,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << kCorpusHeader << '\n';
  for (const Workflow& wf : workflows) {
    for (const Task& t : wf.tasks) {
      out << wf.id << ',' << t.id << ',' << fmt_double(t.workload_mi) << ','
          << fmt_double(t.memory_mb) << ',' << fmt_double(t.output_mb) << '\n';
    }
  }
  if (!out) throw ConfigError("write failed: " + path);
}

std::vector<Workflow> load_workflows(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open corpus: " + path);

  std::vector<Workflow> out;
  std::string line;
  int lineno = 0;

  if (!std::getline(in, line))
    throw ConfigError("corpus " + path + ": missing header row");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCorpusHeader)
    throw ConfigError("corpus " + path + ": bad header, expected `" +
                      std::string(kCorpusHeader) + "`");

  auto finish_workflow = [&](Workflow& wf) {
    const int count = static_cast<int>(wf.tasks.size());
    const auto level = level_for_task_count(count);
    if (!level)
      throw ConfigError("corpus " + path + ": workflow `" + wf.id +
                        "`: task count " + std::to_string(count) +
                        " outside every level band");
    wf.level = *level;
    out.push_back(std::move(wf));
  };

  Workflow current;
  bool open = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      throw ConfigError("corpus line " + std::to_string(lineno) +
                        ": expected 5 fields, got " +
                        std::to_string(fields.size()));

    Task task;
    task.id = static_cast<int>(
        parse_double_field(fields[1], "task_id", lineno));
    task.workload_mi = parse_double_field(fields[2], "workload_mi", lineno);
    task.memory_mb = parse_double_field(fields[3], "memory_mb", lineno);
    task.output_mb = parse_double_field(fields[4], "output_mb", lineno);
    if (task.workload_mi <= 0.0)
      throw ConfigError("corpus line " + std::to_string(lineno) +
                        ": field `workload_mi`: must be > 0");
    if (task.memory_mb <= 0.0)
      throw ConfigError("corpus line " + std::to_string(lineno) +
                        ": field `memory_mb`: must be > 0");
    if (task.output_mb < 0.0)
      throw ConfigError("corpus line " + std::to_string(lineno) +
                        ": field `output_mb`: must be >= 0");

    const std::string& wid = fields[0];
    if (!open || wid != current.id) {
      if (open) finish_workflow(current);
      for (const Workflow& prev : out)
        if (prev.id == wid)
          throw ConfigError("corpus line " + std::to_string(lineno) +
                            ": workflow `" + wid +
                            "` is split across non-adjacent lines");
      current = Workflow{};
      current.id = wid;
      open = true;
    }
    const int expect = static_cast<int>(current.tasks.size()) + 1;
    if (task.id != expect)
      throw ConfigError("corpus line " + std::to_string(lineno) +
                        ": field `task_id`: expected " +
                        std::to_string(expect) + ", got " +
                        std::to_string(task.id));
    current.tasks.push_back(task);
  }
  if (open) finish_workflow(current);
  return out;
}

}  // namespace cfe
