#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace csrflab::fixtures {

inline constexpr std::string_view kAttackFormName = "attack_form.html";
inline constexpr std::string_view kLoginPageName = "login.html";
inline constexpr std::string_view kDefaultAuthority = "forum.local:8080";

// The malicious auto-submitting private-message form, pointed at
// http://<authority>/cgi-bin/Forum/new_pm.php.
std::string attack_form_html(std::string_view authority = kDefaultAuthority,
                             std::string_view recipient = "sohini");

// Stand-alone copy of the forum login page.
std::string login_page_html(std::string_view authority = kDefaultAuthority);

// Writes both pages into `dir` (created if needed).
void emit(const std::filesystem::path& dir, std::string_view authority = kDefaultAuthority,
          std::string_view recipient = "sohini");

}  // namespace csrflab::fixtures
