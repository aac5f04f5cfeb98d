import { ApiClient } from "./api.js";
import { installKeyboard } from "./keyboard.js";
import { Store } from "./state.js";
import { renderApp } from "./views.js";

const store = new Store(new ApiClient(""));
const root = document.getElementById("app")!;

store.subscribe(() => renderApp(root, store));
installKeyboard(store, window);
renderApp(root, store);

const sessionId = new URLSearchParams(window.location.search).get("session");
if (sessionId) {
  store.attach(sessionId).catch((error) => {
    root.textContent = `cannot open session: ${error}`;
  });
}
