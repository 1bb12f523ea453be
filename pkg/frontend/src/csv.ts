/** CSV display and download helpers.
 *
 * Downloads always carry the exact text the service returned; parsing is
 * only for on-screen tables.
 */

export function parseCsv(text: string): string[][] {
  return text
    .split(/\r?\n/)
    .filter((line) => line.length > 0)
    .map((line) => line.split(","));
}

export function renderCsvTable(text: string, maxColumns = 14): string {
  const rows = parseCsv(text);
  if (rows.length === 0) return "<p>empty result</p>";
  const clipped = rows[0].length > maxColumns;
  const show = (row: string[]) => row.slice(0, maxColumns);
  const head = show(rows[0]).map((c) => `<th>${c}</th>`).join("") +
    (clipped ? "<th>…</th>" : "");
  const body = rows.slice(1).map((row) =>
    `<tr>${show(row).map((c) => `<td>${c}</td>`).join("")}` +
    `${clipped ? "<td>…</td>" : ""}</tr>`).join("");
  return `<table class="csv-table" data-testid="csv-table" data-rows="${rows.length - 1}">` +
    `<thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function downloadText(filename: string, text: string,
                             doc: Document = document): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const anchor = doc.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  doc.body.appendChild(anchor);
  anchor.click();
  anchor.remove();
  URL.revokeObjectURL(url);
}
