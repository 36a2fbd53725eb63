// Copyright 2026 The mdlfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdlfuzz/simplify.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mdlfuzz/error.h"
#include "mdlfuzz/graph.h"

namespace mdlfuzz {
namespace {

constexpr std::string_view kDefaultParamBlocklist[] = {
    // Block and line layout.
    "Position", "ZOrder", "Location", "Points", "Labels", "Orientation",
    "ForegroundColor", "BackgroundColor", "DropShadow", "NamePlacement",
    "ShowName", "HideAutomaticName", "FontName", "FontSize", "FontWeight",
    "FontAngle", "SID",
    // Window and paper layout.
    "ScreenColor", "PaperOrientation", "PaperPositionMode", "PaperType",
    "PaperUnits", "TiledPaperMargins", "TiledPageScale", "ShowPageBoundaries",
    "ZoomFactor", "ReportName", "Open", "ModelBrowserVisibility",
    "ModelBrowserWidth", "SIDHighWatermark", "SIDPrevWatermark",
    "ToolBar", "StatusBar", "BrowserShowLibraryLinks",
    "BrowserLookUnderMasks",
    // Model bookkeeping and editor settings.
    "Version", "SavedCharacterEncoding", "LastModifiedBy", "LastModifiedDate",
    "Created", "Creator", "UpdateHistory", "ModifiedByFormat",
    "ModifiedDateFormat", "ModelVersionFormat", "ModifiedComment",
    "ModifiedHistory", "ConfigurationManager", "LastSavedArchitecture",
    "RTWModifiedTimeStamp", "SaveDefaultBlockParams", "ScopeRefreshTime",
    "OverrideScopeRefreshTime", "DisableAllScopes", "BlockNameDataTip",
    "BlockParametersDataTip", "BlockDescriptionStringDataTip",
    "ShowLineDimensions", "ShowPortDataTypes", "ShowLoopsOnError",
    "IgnoreBidirectionalLines", "ShowStorageClass", "ShowTestPointIcons",
    "ShowSignalResolutionIcons", "ShowViewerIcons", "SortedOrder",
    "ExecutionContextIcon", "ShowLinearizationAnnotations",
    "SimulationMode", "LinearizationMsg", "Profile", "ParamWorkspaceSource",
    "AccelSystemTargetFile", "AccelTemplateMakefile", "AccelMakeCommand",
    "TryForcingSFcnDF", "ExtModeBatchMode", "ExtModeEnableFloating",
    "ExtModeTrigType", "ExtModeTrigMode", "ExtModeTrigPort",
    "ExtModeTrigElement", "ExtModeTrigDuration", "ExtModeTrigDurationFloating",
    "ExtModeTrigHoldOff", "ExtModeTrigDelay", "ExtModeTrigDirection",
    "ExtModeTrigLevel", "ExtModeArchiveMode", "ExtModeAutoIncOneShot",
    "ExtModeIncDirWhenArm", "ExtModeAddSuffixToVar", "ExtModeWriteAllDataToWs",
    "ExtModeArmWhenConnect", "ExtModeSkipDownloadWhenConnect",
    "ExtModeLogAll", "ExtModeAutoUpdateStatusClock", "ShowModelReferenceBlockVersion",
    "ShowModelReferenceBlockIO", "CovEnable", "CovSaveName",
    "CovMetricSettings", "CovNameIncrementing", "CovHtmlReporting",
    "CovForceBlockReductionOff", "covSaveCumulativeToWorkspaceVar",
    "CovSaveSingleToWorkspaceVar", "CovCumulativeReport", "CovReportOnPause",
    "ModelDataFile", "ExtModeTrigSignalBlockPath", "ExtModeTrigSignalOutputPortIndex",
    "ExtModeTrigSignalValue", "ExtModeTrigSignalAutoscale",
    "BlockDiagramType", "LibraryLinkDisplay", "WideLines", "ShowLineWidths",
    "SignalResolutionControl", "CloseFcn", "PreLoadFcn", "PostLoadFcn",
    "InitFcn", "StartFcn", "PauseFcn", "ContinueFcn", "StopFcn",
    "PreSaveFcn", "PostSaveFcn",
};

constexpr std::string_view kDefaultSectionBlocklist[] = {
    "BlockDefaults",          "AnnotationDefaults",    "LineDefaults",
    "MaskDefaults",           "MaskParameterDefaults", "BlockParameterDefaults",
    "SystemDefaults",         "Array",                 "Object",
    "Simulink.ConfigSet",     "Simulink.WindowInfo",   "Simulink.EditorInfo",
    "GraphicalInterface",     "Annotation",            "WindowInfo",
};

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_run = false;
  for (char c : s) {
    if (IsSpace(c)) {
      if (!in_run) out += ' ';
      in_run = true;
    } else {
      out += c;
      in_run = false;
    }
  }
  return out;
}

void SimplifySection(Section& section, const SimplifyPolicy& policy) {
  if (policy.strip_comments) section.comments.clear();
  std::erase_if(section.params, [&](const Param& p) {
    return policy.param_blocklist.contains(p.key);
  });
  if (policy.collapse_whitespace) {
    for (auto& p : section.params) {
      if (p.value.kind() != ParamValue::Kind::kBare) {
        p.value = ParamValue::FromLexeme(p.value.kind(),
                                         CollapseWhitespace(p.value.lexeme()));
      }
    }
  }
  std::erase_if(section.children, [&](const Section& c) {
    return policy.section_blocklist.contains(c.name);
  });
  for (auto& child : section.children) SimplifySection(child, policy);
}

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && IsSpace(s[b])) ++b;
  while (e > b && IsSpace(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> SplitList(std::string_view value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(value)};
  while (std::getline(in, item, ',')) {
    std::string t = Trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "yes" || value == "1") {
    return true;
  }
  if (value == "false" || value == "off" || value == "no" || value == "0") {
    return false;
  }
  throw Error(ErrorCode::kInvalidConfig,
              "'" + key + "' expects true/false, got '" + value + "'");
}

Section& MutableDiagram(SyntaxTree& tree) {
  if (Section* system = tree.root.FindChild("System")) return *system;
  return tree.root;
}

void RewriteReferences(Section& section,
                       const std::map<std::string, std::string>& names) {
  for (auto& p : section.params) {
    if (p.key != "SrcBlock" && p.key != "DstBlock") continue;
    const auto it = names.find(p.value.Text());
    if (it != names.end()) p.value = ParamValue::Quoted(it->second);
  }
  for (auto& child : section.children) {
    if (child.name == "Branch") RewriteReferences(child, names);
  }
}

}  // namespace

SimplifyPolicy SimplifyPolicy::Defaults() {
  SimplifyPolicy policy;
  for (auto key : kDefaultParamBlocklist) policy.param_blocklist.emplace(key);
  for (auto name : kDefaultSectionBlocklist) {
    policy.section_blocklist.emplace(name);
  }
  return policy;
}

SimplifyPolicy SimplifyPolicy::FromConfigText(std::string_view text) {
  SimplifyPolicy policy = Defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    if (key == "drop_params") {
      for (auto& k : SplitList(value)) policy.param_blocklist.insert(k);
    } else if (key == "keep_params") {
      for (auto& k : SplitList(value)) policy.param_blocklist.erase(k);
    } else if (key == "drop_sections") {
      for (auto& k : SplitList(value)) policy.section_blocklist.insert(k);
    } else if (key == "keep_sections") {
      for (auto& k : SplitList(value)) policy.section_blocklist.erase(k);
    } else if (key == "strip_comments") {
      policy.strip_comments = ParseBool(key, value);
    } else if (key == "collapse_whitespace") {
      policy.collapse_whitespace = ParseBool(key, value);
    } else {
      throw Error(ErrorCode::kInvalidConfig,
                  "line " + std::to_string(line_no) + ": unknown key '" + key +
                      "'");
    }
  }
  return policy;
}

SimplifyPolicy SimplifyPolicy::FromConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot read policy " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return FromConfigText(buffer.str());
}

SimplifyResult Simplify(const SyntaxTree& tree, const SimplifyPolicy& policy) {
  SimplifyResult result{tree, false};
  SimplifySection(result.tree.root, policy);
  const Section& diagram = DiagramSection(result.tree);
  result.empty_after_simplify =
      std::none_of(diagram.children.begin(), diagram.children.end(),
                   [](const Section& c) { return c.name == "Block"; });
  return result;
}

std::string IndexToName(std::size_t index) {
  std::string name;
  std::size_t n = index + 1;
  while (n > 0) {
    --n;
    name += static_cast<char>('a' + n % 26);
    n /= 26;
  }
  std::reverse(name.begin(), name.end());
  return name;
}

RenameResult RenameIdentifiers(const SyntaxTree& tree,
                               const std::vector<std::string>& order) {
  RenameResult result{tree, {}};
  Section& diagram = MutableDiagram(result.tree);

  std::vector<std::string> file_order;
  std::set<std::string> present;
  for (const auto& child : diagram.children) {
    if (child.name != "Block") continue;
    const Param* name = child.FindParam("Name");
    if (name == nullptr) continue;
    std::string text = name->value.Text();
    if (!present.insert(text).second) {
      throw Error(ErrorCode::kDuplicateOriginalName,
                  "block name '" + text + "' appears twice");
    }
    file_order.push_back(std::move(text));
  }

  std::map<std::string, std::string> names;
  auto assign = [&](const std::string& original) {
    std::string short_name = IndexToName(result.map.size());
    names.emplace(original, short_name);
    result.map.emplace_back(original, std::move(short_name));
  };
  std::set<std::string> ordered;
  for (const auto& original : order) {
    if (!ordered.insert(original).second) {
      throw Error(ErrorCode::kDuplicateOriginalName,
                  "rename order repeats '" + original + "'");
    }
    if (present.contains(original)) assign(original);
  }
  for (const auto& original : file_order) {
    if (!names.contains(original)) assign(original);
  }

  for (auto& child : diagram.children) {
    if (child.name == "Block") {
      if (Param* name = child.FindParam("Name")) {
        name->value = ParamValue::Quoted(names.at(name->value.Text()));
      }
    } else if (child.name == "Line") {
      RewriteReferences(child, names);
    }
  }
  return result;
}

FlatnessReport CheckFlatNoDeps(const SyntaxTree& tree) {
  static const std::set<std::string, std::less<>> kHierarchicalTypes = {
      "SubSystem", "ModelReference", "Reference", "S-Function",
      "M-S-Function"};
  static constexpr std::string_view kLinkParams[] = {"SourceBlock",
                                                     "ReferenceBlock",
                                                     "ModelName"};
  FlatnessReport report;
  const Section& diagram = DiagramSection(tree);
  for (const auto& child : diagram.children) {
    if (child.name != "Block") continue;
    const Param* name = child.FindParam("Name");
    const std::string label = name ? name->value.Text() : "<unnamed>";
    const Param* type = child.FindParam("BlockType");
    if (type != nullptr && kHierarchicalTypes.contains(type->value.Text())) {
      report.flat = false;
      report.reasons.push_back("block '" + label + "' has type " +
                               type->value.Text());
      continue;
    }
    for (auto key : kLinkParams) {
      if (const Param* link = child.FindParam(key)) {
        report.flat = false;
        report.reasons.push_back("block '" + label + "' links " +
                                 std::string(key) + " " + link->value.Text());
        break;
      }
    }
  }
  return report;
}

}  // namespace mdlfuzz
