/** Tabbed shell wiring the three views to the service. */

import { Client } from "./api.js";
import { DiagnosticsView } from "./diagnostics-view.js";
import { MappingScreen } from "./mapping-screen.js";
import { RepositoryView } from "./repository-view.js";

export interface App {
  mapping: MappingScreen;
  diagnostics: DiagnosticsView;
  repository: RepositoryView;
}

export async function initApp(root: HTMLElement, client: Client): Promise<App> {
  root.innerHTML = `
    <nav id="tabs">
      <button data-tab="mapping" class="active">Mapping</button>
      <button data-tab="diagnostics">Diagnostics</button>
      <button data-tab="repository">Repository</button>
    </nav>
    <section id="tab-mapping"></section>
    <section id="tab-diagnostics" hidden></section>
    <section id="tab-repository" hidden></section>
  `;
  const mapping = new MappingScreen(root.querySelector("#tab-mapping")!, client);
  const diagnostics = new DiagnosticsView(root.querySelector("#tab-diagnostics")!, client);
  const repository = new RepositoryView(root.querySelector("#tab-repository")!, client);

  root.querySelector("#tabs")!.addEventListener("click", (event) => {
    const button = event.target as HTMLElement;
    const tab = button.dataset.tab;
    if (!tab) return;
    for (const other of root.querySelectorAll<HTMLElement>("#tabs button")) {
      other.classList.toggle("active", other === button);
    }
    for (const section of root.querySelectorAll<HTMLElement>("section[id^=tab-]")) {
      section.hidden = section.id !== `tab-${tab}`;
    }
  });

  try {
    await Promise.all([mapping.load(), diagnostics.load()]);
  } catch (error) {
    mapping.showBanner(`service unreachable: ${String(error)}`);
  }
  return { mapping, diagnostics, repository };
}

declare global {
  interface Window {
    dmkfApp?: Promise<App>;
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.dmkfApp = initApp(document.getElementById("app")!, new Client(""));
}
