import { STRINGS } from "./locale";
import type { ContentDetails, RankedEntry } from "./types";

/** HTML-string renderers; no client-side re-sorting, API order is the order. */

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function representativeCell(entry: RankedEntry): string {
  const rep = entry.representative;
  if (rep.kind === "text") {
    return '<blockquote class="rep-text">' + escapeHtml(rep.text) + "</blockquote>";
  }
  if (rep.kind === "image") {
    // src is filled in after an authenticated fetch; see main.ts
    return (
      '<img class="rep-thumb" alt="" data-media="' +
      escapeHtml(rep.media_url) +
      '">'
    );
  }
  return (
    '<a class="rep-file" data-media="' +
    escapeHtml(rep.media_url) +
    '" download="' +
    escapeHtml(rep.checksum) +
    '">' +
    STRINGS.downloadMedia +
    "</a>"
  );
}

export function renderGrid(entries: RankedEntry[]): string {
  if (entries.length === 0) {
    return '<p class="empty">' + STRINGS.emptyGrid + "</p>";
  }
  return entries
    .map(
      (entry) =>
        '<article class="tile" data-cluster="' +
        escapeHtml(entry.cluster_id) +
        '" data-rank="' +
        entry.rank +
        '">' +
        '<span class="badge">' +
        entry.period_share_count +
        " " +
        STRINGS.sharesBadge +
        "</span>" +
        representativeCell(entry) +
        '<footer class="tile-counts">' +
        entry.period_distinct_groups +
        " " +
        STRINGS.groupsLabel +
        " &middot; " +
        entry.period_distinct_senders +
        " " +
        STRINGS.sendersLabel +
        "</footer>" +
        "</article>",
    )
    .join("");
}

export function renderDetail(details: ContentDetails): string {
  const rows = [
    '<section class="detail" data-cluster="' + escapeHtml(details.cluster_id) + '">',
    "<h2>" + STRINGS.detailHeading + "</h2>",
    '<dl class="counters">',
    "<dt>" + STRINGS.sharesBadge + '</dt><dd data-counter="shares">' +
      details.period_share_count + "</dd>",
    "<dt>" + STRINGS.groupsLabel + '</dt><dd data-counter="groups">' +
      details.period_distinct_groups + "</dd>",
    "<dt>" + STRINGS.sendersLabel + '</dt><dd data-counter="senders">' +
      details.period_distinct_senders + "</dd>",
    "</dl>",
    "<h3>" + STRINGS.groupListHeading + "</h3>",
    '<ul class="group-list">' +
      details.group_titles.map((t) => "<li>" + escapeHtml(t) + "</li>").join("") +
      "</ul>",
  ];
  if (details.reverse_search_url !== undefined) {
    rows.push(
      '<a class="reverse-search" target="_blank" rel="noopener" href="' +
        escapeHtml(details.reverse_search_url) +
        '">' +
        STRINGS.reverseSearch +
        "</a>",
    );
  }
  rows.push('<button class="close-detail">' + STRINGS.closePanel + "</button>");
  rows.push("</section>");
  return rows.join("\n");
}

export function renderKindTabs(active: string): string {
  const tabs: Array<[string, string]> = [
    ["image", STRINGS.tabImage],
    ["video", STRINGS.tabVideo],
    ["audio", STRINGS.tabAudio],
    ["text", STRINGS.tabText],
  ];
  return tabs
    .map(
      ([kind, label]) =>
        '<button class="tab' +
        (kind === active ? " active" : "") +
        '" data-kind="' +
        kind +
        '">' +
        label +
        "</button>",
    )
    .join("");
}
