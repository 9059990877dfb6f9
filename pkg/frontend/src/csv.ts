// Just enough CSV to read the label column out of the file the user is
// uploading. The backend is the authority on parsing; this only feeds the
// ground-truth shading in the results panel, which needs label positions
// the dataset endpoints do not expose.

export function splitCsvLine(line: string): string[] {
  const cells: string[] = [];
  let cell = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i]!;
    if (quoted) {
      if (ch === '"' && line[i + 1] === '"') {
        cell += '"';
        i++;
      } else if (ch === '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      cells.push(cell);
      cell = "";
    } else {
      cell += ch;
    }
  }
  cells.push(cell);
  return cells;
}

export function labelColumn(csvText: string, targetIndex: number): number[] {
  const lines = csvText.split(/\r?\n/).filter((line) => line.length > 0);
  return lines.slice(1).map((line) => {
    const cell = splitCsvLine(line)[targetIndex]?.trim();
    return cell === "1" ? 1 : 0;
  });
}
