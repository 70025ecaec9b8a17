/**
 * Minimal element tree.
 *
 * Views build plain data nodes; the browser shell mounts them onto the
 * real DOM, while tests serialize them to HTML strings (snapshots) and
 * invoke event handlers directly. No framework, no virtual diffing:
 * views re-render the region they own.
 */

export type Handler = (value?: string) => void;

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  events: Record<string, Handler>;
  children: Child[];
}

export type Child = VNode | string;

export function h(
  tag: string,
  attrs: Record<string, string> = {},
  ...children: (Child | Child[] | null | undefined)[]
): VNode {
  const flat: Child[] = [];
  for (const child of children) {
    if (child === null || child === undefined) continue;
    if (Array.isArray(child)) flat.push(...child);
    else flat.push(child);
  }
  return { tag, attrs, events: {}, children: flat };
}

/** Attach an event handler; returns the node for chaining. */
export function on(node: VNode, event: string, handler: Handler): VNode {
  node.events[event] = handler;
  return node;
}

const VOID_TAGS = new Set(["br", "hr", "img", "input", "meta", "link"]);

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderToString(node: Child): string {
  if (typeof node === "string") return escapeHtml(node);
  const attrs = Object.entries(node.attrs)
    .map(([key, value]) => ` ${key}="${escapeHtml(value)}"`)
    .join("");
  if (VOID_TAGS.has(node.tag)) return `<${node.tag}${attrs}>`;
  const inner = node.children.map(renderToString).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

/** Depth-first search for the first node whose attribute matches. */
export function findByAttr(root: Child, attr: string, value: string): VNode | null {
  if (typeof root === "string") return null;
  if (root.attrs[attr] === value) return root;
  for (const child of root.children) {
    const found = findByAttr(child, attr, value);
    if (found) return found;
  }
  return null;
}

export function textOf(node: Child): string {
  if (typeof node === "string") return node;
  return node.children.map(textOf).join("");
}

/** Browser-side: materialize the tree as real DOM nodes. */
export function toDom(node: Child, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const el = doc.createElement(node.tag);
  for (const [key, value] of Object.entries(node.attrs)) el.setAttribute(key, value);
  for (const [event, handler] of Object.entries(node.events)) {
    el.addEventListener(event, (raw: Event) => {
      const target = raw.target as HTMLInputElement | null;
      handler(target && "value" in target ? target.value : undefined);
    });
  }
  for (const child of node.children) el.appendChild(toDom(child, doc));
  return el;
}

export function mount(container: Element, node: Child): void {
  container.replaceChildren(toDom(node, container.ownerDocument));
}
