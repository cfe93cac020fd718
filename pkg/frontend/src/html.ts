/** Minimal element tree the view builders emit.
 *
 * Views return plain trees so tests can walk them without a DOM; the
 * browser entry point serializes them and assigns innerHTML.
 */

export interface ElementNode {
  tag: string;
  attrs: Record<string, string>;
  children: TreeNode[];
}

export type TreeNode = ElementNode | string;

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (TreeNode | TreeNode[])[]
): ElementNode {
  return { tag, attrs, children: children.flat() };
}

const VOID_TAGS = new Set(["br", "hr", "img", "input", "path", "circle", "line"]);

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function toHtml(node: TreeNode): string {
  if (typeof node === "string") return escapeHtml(node);
  const attrs = Object.entries(node.attrs)
    .map(([k, v]) => ` ${k}="${escapeHtml(v)}"`)
    .join("");
  if (VOID_TAGS.has(node.tag) && node.children.length === 0) {
    return `<${node.tag}${attrs}/>`;
  }
  const inner = node.children.map(toHtml).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

/** Depth-first text content, the way tests read rendered cells. */
export function textOf(node: TreeNode): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}

/** All descendant elements (node included) matching a predicate. */
export function findAll(node: TreeNode, match: (el: ElementNode) => boolean): ElementNode[] {
  if (typeof node === "string") return [];
  const here = match(node) ? [node] : [];
  return here.concat(node.children.flatMap((c) => findAll(c, match)));
}

export function byClass(node: TreeNode, className: string): ElementNode[] {
  return findAll(node, (el) => (el.attrs["class"] ?? "").split(" ").includes(className));
}

export function byTag(node: TreeNode, tag: string): ElementNode[] {
  return findAll(node, (el) => el.tag === tag);
}
