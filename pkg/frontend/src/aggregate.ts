/** Seed aggregation over run rows: per-cell mean, sample sd, and count.
 *
 * Mirrors the simulator's own aggregation exactly (n-1 denominator,
 * sd = 0 for single-row cells, cells sorted by group key) so that
 * figures built here agree with the table the simulator would emit.
 */

export type CellValue = string | number;

export interface AggregateCell {
  key: Record<string, CellValue>;
  count: number;
  mean: Record<string, number>;
  sd: Record<string, number>;
}

function compareKeys(a: CellValue[], b: CellValue[]): number {
  for (let i = 0; i < a.length; i++) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

export function aggregateSeeds(
  rows: Record<string, CellValue>[],
  groupKeys: string[],
  valueKeys: string[]
): AggregateCell[] {
  const cells = new Map<string, { key: CellValue[]; rows: Record<string, CellValue>[] }>();
  for (const row of rows) {
    const key = groupKeys.map((k) => {
      if (!(k in row)) throw new Error(`missing group key "${k}"`);
      return row[k];
    });
    const tag = JSON.stringify(key);
    if (!cells.has(tag)) cells.set(tag, { key, rows: [] });
    cells.get(tag)!.rows.push(row);
  }
  const ordered = [...cells.values()].sort((a, b) => compareKeys(a.key, b.key));
  return ordered.map(({ key, rows: members }) => {
    const cell: AggregateCell = {
      key: Object.fromEntries(groupKeys.map((k, i) => [k, key[i]])),
      count: members.length,
      mean: {},
      sd: {},
    };
    for (const vk of valueKeys) {
      const values = members.map((m) => {
        const v = Number(m[vk]);
        return v;
      });
      const mean = values.reduce((s, v) => s + v, 0) / values.length;
      cell.mean[vk] = mean;
      if (values.length > 1) {
        const ss = values.reduce((s, v) => s + (v - mean) * (v - mean), 0);
        cell.sd[vk] = Math.sqrt(ss / (values.length - 1));
      } else {
        cell.sd[vk] = 0.0;
      }
    }
    return cell;
  });
}
